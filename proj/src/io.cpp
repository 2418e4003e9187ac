#include "freedec/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "freedec/errors.hpp"
#include "json.hpp"

namespace freedec {

using nlohmann::json;

namespace {

std::vector<double> real_array(const json& j, const char* what) {
    if (!j.is_array()) throw InputError(std::string("model file: '") + what + "' must be an array");
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_number()) throw InputError(std::string("model file: '") + what + "' holds a non-number");
        v.push_back(e.get<double>());
    }
    return v;
}

const json& member(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw InputError(std::string("model file: missing '") + key + "'");
    return *it;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string model_to_json(const DensityModel& m, const std::optional<GlueFunction>& glue) {
    m.validate();
    json j;
    j["schema_version"] = kModelSchemaVersion;
    j["support"] = {m.lo, m.hi};
    json basis{{"kind", basis_name(m.basis)}};
    if (m.basis == BasisKind::Jacobi) {
        basis["alpha"] = m.alpha;
        basis["beta"] = m.beta;
    }
    j["basis"] = basis;
    j["coefficients"] = m.psi;
    j["damping"] = m.damping;
    if (glue) {
        j["glue"] = {{"c", glue->c}, {"d", glue->d}, {"poles", glue->poles}, {"residues", glue->residues},
                     {"residual", glue->residual}};
    }
    j["fit_meta"] = {{"n_s", m.meta.n_s},         {"K", m.meta.K},
                     {"gamma", m.meta.gamma},     {"kernel", m.meta.kernel},
                     {"bandwidth", m.meta.bandwidth}, {"seed", m.meta.seed},
                     {"delta", m.meta.delta}};
    if (m.degenerate || m.repair_warning) j["flags"] = {{"degenerate", m.degenerate}, {"repair_warning", m.repair_warning}};
    return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InputError("model file: top level must be an object");
    const json& ver = member(j, "schema_version");
    if (!ver.is_number_integer() || ver.get<int>() != kModelSchemaVersion)
        throw InputError("model file: unsupported schema_version");

    ModelFile out;
    DensityModel& m = out.model;
    const auto sup = real_array(member(j, "support"), "support");
    if (sup.size() != 2) throw InputError("model file: support must be [lo, hi]");
    m.lo = sup[0];
    m.hi = sup[1];
    const json& basis = member(j, "basis");
    if (!basis.is_object()) throw InputError("model file: basis must be an object");
    m.basis = parse_basis(member(basis, "kind").get<std::string>());
    if (m.basis == BasisKind::Jacobi) {
        m.alpha = member(basis, "alpha").get<double>();
        m.beta = member(basis, "beta").get<double>();
    }
    m.psi = real_array(member(j, "coefficients"), "coefficients");
    m.damping = real_array(member(j, "damping"), "damping");
    if (m.damping.size() != m.psi.size()) throw InputError("model file: damping and coefficients differ in length");

    if (auto it = j.find("fit_meta"); it != j.end() && it->is_object()) {
        const json& f = *it;
        m.meta.n_s = f.value("n_s", std::size_t{0});
        m.meta.K = f.value("K", m.K());
        m.meta.gamma = f.value("gamma", 0.0);
        m.meta.kernel = f.value("kernel", std::string("none"));
        m.meta.bandwidth = f.value("bandwidth", 0.0);
        m.meta.seed = f.value("seed", std::uint64_t{0});
        m.meta.delta = f.value("delta", 0.0);
        m.gamma = m.meta.gamma;
    }
    if (auto it = j.find("flags"); it != j.end() && it->is_object()) {
        m.degenerate = it->value("degenerate", false);
        m.repair_warning = it->value("repair_warning", false);
    }
    m.validate();

    if (auto it = j.find("glue"); it != j.end() && !it->is_null()) {
        GlueFunction g;
        g.c = member(*it, "c").get<double>();
        g.d = member(*it, "d").get<double>();
        g.poles = real_array(member(*it, "poles"), "glue.poles");
        g.residues = real_array(member(*it, "residues"), "glue.residues");
        g.residual = it->value("residual", 0.0);
        if (g.poles.size() != g.residues.size()) throw InputError("model file: glue poles and residues differ in length");
        for (double a : g.poles)
            if (!std::isfinite(a) || (a > m.lo && a < m.hi)) throw InputError("model file: glue pole inside the support");
        out.glue = std::move(g);
    }
    return out;
}

std::string density_csv(const std::vector<double>& x, const std::vector<double>& density) {
    if (x.size() != density.size()) throw InputError("grid and density differ in length");
    std::string s = "x,density\n";
    s.reserve(40 * x.size() + 16);
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += fmt17(x[i]);
        s += ',';
        s += fmt17(density[i]);
        s += '\n';
    }
    return s;
}

GridDensity parse_density_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError("density file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,density") throw InputError("density file: expected header 'x,density'");
    GridDensity g;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InputError("density file: row " + std::to_string(row) + " has no comma");
        double x, y;
        try {
            std::size_t p1 = 0, p2 = 0;
            x = std::stod(line.substr(0, comma), &p1);
            y = std::stod(line.substr(comma + 1), &p2);
            if (p1 != comma || p2 != line.size() - comma - 1) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            throw InputError("density file: row " + std::to_string(row) + " is not two reals");
        }
        if (!std::isfinite(x) || !std::isfinite(y)) throw InputError("density file: non-finite value on row " + std::to_string(row));
        if (!g.x.empty() && !(x > g.x.back())) throw InputError("density file: x must be strictly increasing");
        if (y < 0.0) throw InputError("density file: negative density on row " + std::to_string(row));
        g.x.push_back(x);
        g.values.push_back(y);
    }
    if (g.x.size() < 2) throw InputError("density file needs at least two rows");
    return g;
}

std::string eigenvalues_text(const std::vector<double>& values) {
    std::string s;
    s.reserve(26 * values.size());
    for (double v : values) {
        s += fmt17(v);
        s += '\n';
    }
    return s;
}

std::vector<double> parse_eigenvalues(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(tok, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != tok.size() || !std::isfinite(v))
                throw InputError("eigenvalue file: bad value '" + tok + "' on line " + std::to_string(row));
            out.push_back(v);
        }
    }
    if (out.empty()) throw InputError("eigenvalue file holds no values");
    return out;
}

std::string decompression_diagnostics_json(const DecompressionResult& r, const std::string& method) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["method"] = method;
    j["ratio"] = r.ratio;
    j["t"] = r.t;
    j["delta"] = r.delta;
    j["support"] = {num(r.support_lo), num(r.support_hi)};
    j["failures"] = r.failures;
    j["points"] = r.x.size();
    j["mass"] = num(r.mass());
    json pts = json::array();
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        const auto& d = r.diagnostics[i];
        if (d.converged) continue;
        pts.push_back({{"index", i},
                       {"x", r.x[i]},
                       {"z", {num(d.z.real()), num(d.z.imag())}},
                       {"iterations", d.iterations},
                       {"residual", num(d.residual)}});
    }
    j["failed_points"] = pts;
    return j.dump(2) + "\n";
}

std::optional<std::vector<double>> parse_grid_spec(const std::string& spec) {
    if (spec == "auto") return std::nullopt;
    const auto a = spec.find(':');
    const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
    if (b == std::string::npos || spec.find(':', b + 1) != std::string::npos)
        throw InputError("grid must be 'auto' or 'lo:hi:count', got '" + spec + "'");
    double lo, hi;
    long long count;
    try {
        std::size_t p1, p2, p3;
        const std::string s1 = spec.substr(0, a), s2 = spec.substr(a + 1, b - a - 1), s3 = spec.substr(b + 1);
        lo = std::stod(s1, &p1);
        hi = std::stod(s2, &p2);
        count = std::stoll(s3, &p3);
        if (p1 != s1.size() || p2 != s2.size() || p3 != s3.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw InputError("grid must be 'auto' or 'lo:hi:count', got '" + spec + "'");
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) throw InputError("grid needs finite lo < hi");
    if (count < 2 || count > 100000000) throw InputError("grid count must be between 2 and 1e8");
    return uniform_grid(lo, hi, static_cast<std::size_t>(count));
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw InputError("cannot write '" + tmp.string() + "'");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw InputError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError("cannot move output into place at '" + path + "'");
    }
}

}  // namespace freedec
