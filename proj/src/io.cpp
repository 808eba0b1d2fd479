#include "couette/io.hpp"

#include <fstream>
#include <stdexcept>

namespace couette {

using nlohmann::json;

json grid_to_json(const GridSpec& g)
{
    return {{"nx", g.nx}, {"ny", g.ny}, {"ly", g.ly}, {"dealias", g.dealias}};
}

GridSpec grid_from_json(const json& j)
{
    GridSpec g;
    g.nx = j.value("nx", g.nx);
    g.ny = j.value("ny", g.ny);
    g.ly = j.value("ly", g.ly);
    g.dealias = j.value("dealias", g.dealias);
    return g;
}

json params_to_json(const PhysParams& p)
{
    return {{"nu", p.nu}, {"mu", p.mu}, {"eta", p.eta}, {"b", p.b}};
}

PhysParams params_from_json(const json& j)
{
    PhysParams p;
    p.nu = j.value("nu", p.nu);
    p.mu = j.value("mu", p.mu);
    p.eta = j.value("eta", p.eta);
    p.b = j.value("b", p.b);
    return p;
}

namespace {

json field_to_json(const SpectralField& f)
{
    std::vector<double> v;
    v.reserve(2 * f.coef.size());
    for (const cplx& c : f.coef) {
        v.push_back(c.real());
        v.push_back(c.imag());
    }
    return {{"shear", f.shear}, {"coef", v}};
}

SpectralField field_from_json(const GridSpec& g, const json& j)
{
    SpectralField f(g, j.at("shear").get<double>());
    const auto v = j.at("coef").get<std::vector<double>>();
    if (v.size() != 2 * g.size()) throw std::invalid_argument("checkpoint: coefficient array does not match grid");
    for (std::size_t i = 0; i < g.size(); ++i) f.coef[i] = cplx{v[2 * i], v[2 * i + 1]};
    return f;
}

}  // namespace

json state_to_json(const SystemState& s)
{
    return {{"schema_version", kSchemaVersion},
            {"kind", "state"},
            {"grid", grid_to_json(s.grid())},
            {"params", params_to_json(s.params)},
            {"t", s.t},
            {"w", field_to_json(s.w)},
            {"j", field_to_json(s.j)},
            {"theta", field_to_json(s.theta)}};
}

SystemState state_from_json(const json& j)
{
    if (j.value("schema_version", 0) != kSchemaVersion) throw std::invalid_argument("checkpoint: unsupported schema version");
    const GridSpec g = grid_from_json(j.at("grid"));
    g.validate();
    SystemState s(g, params_from_json(j.at("params")), j.at("t").get<double>());
    s.w = field_from_json(g, j.at("w"));
    s.j = field_from_json(g, j.at("j"));
    s.theta = field_from_json(g, j.at("theta"));
    return s;
}

void write_json_file(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(1) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

}  // namespace couette
