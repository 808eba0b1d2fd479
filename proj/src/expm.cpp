#include "couette/expm.hpp"

#include <algorithm>
#include <cmath>

namespace couette {

Eigen::MatrixXcd expm_pade13(const Eigen::MatrixXcd& A)
{
    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const Eigen::Index n = A.rows();
    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
    const Eigen::MatrixXcd As = A / std::ldexp(1.0, s);

    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd A2 = As * As;
    const Eigen::MatrixXcd A4 = A2 * A2;
    const Eigen::MatrixXcd A6 = A4 * A2;

    Eigen::MatrixXcd inner = b[13] * A6 + b[11] * A4 + b[9] * A2;
    Eigen::MatrixXcd U = A6 * inner;
    U += b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I;
    U = As * U;

    inner = b[12] * A6 + b[10] * A4 + b[8] * A2;
    Eigen::MatrixXcd V = A6 * inner;
    V += b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

    Eigen::MatrixXcd R = (V - U).partialPivLu().solve(V + U);
    for (int i = 0; i < s; ++i) R = R * R;
    return R;
}

}  // namespace couette
