#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <unistd.h>

#include "freedec/ensembles.hpp"
#include "freedec/errors.hpp"
#include "freedec/io.hpp"
#include "json.hpp"

using namespace freedec;
namespace fs = std::filesystem;

namespace {

DensityModel mp_model() {
    const auto draw = draw_marchenko_pastur(1000, 50000, 11);
    return fit_density(eigenvalues_symmetric(draw.matrix), FitOptions{});
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

fs::path scratch_dir() {
    const fs::path p = fs::temp_directory_path() / ("freedec_io_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("model round trip through JSON") {
    const DensityModel m = mp_model();
    const GlueFunction g = fit_glue(m, 1, false);
    const std::string text = model_to_json(m, g);
    const ModelFile back = model_from_json(text);

    CHECK(back.model.lo == m.lo);
    CHECK(back.model.hi == m.hi);
    CHECK(back.model.basis == m.basis);
    CHECK(max_abs_diff(back.model.psi, m.psi) <= 1e-15);
    CHECK(max_abs_diff(back.model.damping, m.damping) <= 1e-15);
    CHECK(back.model.meta.n_s == m.meta.n_s);
    CHECK(back.model.meta.K == m.meta.K);
    REQUIRE(back.glue.has_value());
    CHECK(back.glue->c == g.c);
    CHECK(back.glue->d == g.d);
    CHECK(back.glue->poles == g.poles);
    CHECK(back.glue->residues == g.residues);

    // Densities from both copies agree, and serializing again is byte-identical.
    const auto xs = uniform_grid(m.lo, m.hi, 301);
    CHECK(max_abs_diff(back.model.density(xs), m.density(xs)) <= 1e-15);
    CHECK(model_to_json(back.model, back.glue) == text);

    const DensityModel j = as_jacobi(m);
    const ModelFile jb = model_from_json(model_to_json(j, std::nullopt));
    CHECK(jb.model.basis == BasisKind::Jacobi);
    CHECK(jb.model.alpha == j.alpha);
    CHECK_FALSE(jb.glue.has_value());
}

TEST_CASE("malformed model files are rejected") {
    const DensityModel m = mp_model();
    const auto good = nlohmann::json::parse(model_to_json(m, std::nullopt));
    auto reject = [](const nlohmann::json& j) { CHECK_THROWS_AS(model_from_json(j.dump()), InputError); };

    CHECK_THROWS_AS(model_from_json("{ not json"), InputError);
    CHECK_THROWS_AS(model_from_json("[1, 2]"), InputError);
    {
        auto j = good;
        j["schema_version"] = 99;
        reject(j);
    }
    {
        auto j = good;
        j.erase("coefficients");
        reject(j);
    }
    {
        auto j = good;
        j["coefficients"][3] = "x";
        reject(j);
    }
    {
        auto j = good;
        j["damping"].erase(0);
        reject(j);
    }
    {
        auto j = good;
        j["support"] = {1.0, 0.5};
        reject(j);
    }
    {
        auto j = good;
        j["glue"] = {{"c", 0.0}, {"d", 0.0}, {"poles", {0.5 * (m.lo + m.hi)}}, {"residues", {1.0}}};
        reject(j);
    }
    {
        auto j = good;
        j["glue"] = {{"c", 0.0}, {"d", 0.0}, {"poles", {m.hi + 1.0}}, {"residues", {}}};
        reject(j);
    }
}

TEST_CASE("density CSV") {
    const std::vector<double> x{0.0, 0.1, 0.30000000000000004, 1e-300};
    const std::vector<double> y{1.0, 2.5, 1.0 / 3.0, 0.0};
    const std::string s = density_csv(x, y);
    CHECK(s.rfind("x,density\n", 0) == 0);

    const std::vector<double> xi{-1.0, -0.25, 0.5, 2.0};
    const auto g = parse_density_csv(density_csv(xi, y));
    CHECK(g.x == xi);
    CHECK(g.values == y);
    CHECK(parse_density_csv("x,density\r\n0,1\r\n1,2\r\n\n").x.size() == 2);

    CHECK_THROWS_AS(density_csv({0.0, 1.0}, {1.0}), InputError);
    CHECK_THROWS_AS(parse_density_csv(""), InputError);
    CHECK_THROWS_AS(parse_density_csv("a,b\n0,1\n1,1\n"), InputError);
    CHECK_THROWS_AS(parse_density_csv("x,density\n0,1\n"), InputError);
    CHECK_THROWS_AS(parse_density_csv("x,density\n0,1\n1\n"), InputError);
    CHECK_THROWS_AS(parse_density_csv("x,density\n0,1\n1,2x\n"), InputError);
    CHECK_THROWS_AS(parse_density_csv("x,density\n0,1\n0,2\n"), InputError);
    CHECK_THROWS_AS(parse_density_csv("x,density\n0,1\n1,-0.5\n"), InputError);
    CHECK_THROWS_AS(parse_density_csv("x,density\n0,1\n1,nan\n"), InputError);
}

TEST_CASE("eigenvalue text") {
    const std::vector<double> v{3.0, -1.5, 1e-17, 0.1};
    CHECK(parse_eigenvalues(eigenvalues_text(v)) == v);
    CHECK(parse_eigenvalues("# header\n1 2\t3  # trailing\n\n4e-1\n") == std::vector<double>{1, 2, 3, 0.4});
    CHECK_THROWS_AS(parse_eigenvalues("# nothing\n"), InputError);
    CHECK_THROWS_AS(parse_eigenvalues("1 2 three\n"), InputError);
    CHECK_THROWS_AS(parse_eigenvalues("1 inf\n"), InputError);
    CHECK_THROWS_AS(parse_eigenvalues("1.5.2\n"), InputError);
}

TEST_CASE("grid strings") {
    CHECK_FALSE(parse_grid_spec("auto").has_value());
    const auto g = parse_grid_spec("-1:3:5");
    REQUIRE(g.has_value());
    CHECK(*g == std::vector<double>{-1, 0, 1, 2, 3});
    CHECK(parse_grid_spec("0:1:1001")->size() == 1001);
    for (const char* bad : {"", "0:1", "0:1:2:3", "1:0:10", "0:1:1", "0:1:x", "a:1:10", "0:1:10.5", "0:inf:3"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_grid_spec(bad), InputError);
    }
}

TEST_CASE("atomic file writes") {
    const fs::path dir = scratch_dir();
    const std::string p = (dir / "out.txt").string();
    write_file_atomic(p, "first\n");
    CHECK(read_text_file(p) == "first\n");
    write_file_atomic(p, "second");
    CHECK(read_text_file(p) == "second");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);  // no temporary left behind

    CHECK_THROWS_AS(write_file_atomic((dir / "missing" / "x.txt").string(), "y"), InputError);
    CHECK_THROWS_AS(read_text_file((dir / "absent").string()), InputError);
    fs::remove_all(dir);
}

TEST_CASE("diagnostics JSON lists failed points") {
    DecompressionResult r;
    r.ratio = 4.0;
    r.t = std::log(4.0);
    r.x = {0.0, 1.0, 2.0};
    r.density = {0.1, std::numeric_limits<double>::quiet_NaN(), 0.2};
    r.diagnostics.resize(3);
    r.diagnostics[0].converged = r.diagnostics[2].converged = true;
    r.diagnostics[1].converged = false;
    r.diagnostics[1].iterations = 50;
    r.failures = 1;
    const auto j = nlohmann::json::parse(decompression_diagnostics_json(r, "characteristic"));
    CHECK(j["failures"] == 1);
    REQUIRE(j["failed_points"].size() == 1);
    CHECK(j["failed_points"][0]["index"] == 1);
    CHECK(j["failed_points"][0]["iterations"] == 50);
    CHECK(j["method"] == "characteristic");
}
