#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "epialign/error.hpp"
#include "epialign/regress.hpp"
#include "epialign/synthetic.hpp"

using namespace epialign;
using namespace epialign::regress;

namespace {

SvrParams params(KernelKind kind, double C = 1.0, double eps = 0.1) {
    SvrParams p;
    p.C = C;
    p.epsilon = eps;
    p.kernel.kind = kind;
    return p;
}

constexpr KernelKind kAllKernels[] = {KernelKind::linear, KernelKind::polynomial, KernelKind::rbf,
                                      KernelKind::sigmoid};

Matrix random_matrix(synthetic::Rng& rng, std::size_t n, std::size_t d) {
    Matrix X(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) X(i, j) = rng.normal();
    return X;
}

}  // namespace

TEST_SUITE("regress") {

TEST_CASE("fit_scaler") {
    const Matrix X = Matrix::from_rows({{1, 7}, {2, 7}, {3, 7}});
    const std::vector<double> y{1, 2, 3};
    const Scaler s = fit_scaler(X, y);
    CHECK(s.means[0] == doctest::Approx(2.0));
    CHECK(s.scales[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK(s.scales[0] == doctest::Approx(0.8165).epsilon(1e-4));
    CHECK(s.scales[1] == 1.0);
    const Matrix Z = s.apply(X);
    CHECK(Z(0, 1) == 0.0);
    CHECK(Z(2, 1) == 0.0);
    double mean = 0;
    double sq = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        mean += Z(i, 0) / 3;
        sq += Z(i, 0) * Z(i, 0) / 3;
    }
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : y) CHECK(s.invert_target(s.apply_target(v)) == doctest::Approx(v).epsilon(1e-12));
    CHECK_THROWS_AS(fit_scaler(Matrix(0, 1), std::vector<double>{}), ContractError);
    CHECK_THROWS_AS(fit_scaler(X, std::vector<double>{1, 2}), ContractError);
}

TEST_CASE("kernel_eval") {
    const std::vector<double> x{1, 2};
    const std::vector<double> y{3, 4};
    KernelParams lin{KernelKind::linear};
    CHECK(kernel_eval(lin, x, y) == 11.0);
    KernelParams rbf{KernelKind::rbf, 0.7};
    CHECK(kernel_eval(rbf, x, x) == 1.0);
    CHECK(kernel_eval(rbf, x, y) == doctest::Approx(std::exp(-0.7 * 8)));
    KernelParams poly{KernelKind::polynomial, 1.0, 1.0, 2};
    const std::vector<double> e{1, 0};
    CHECK(kernel_eval(poly, e, e) == 4.0);
    KernelParams sig{KernelKind::sigmoid, 0.5, 0.25};
    CHECK(kernel_eval(sig, x, y) == doctest::Approx(std::tanh(0.5 * 11 + 0.25)));
    CHECK_THROWS_AS(kernel_eval(lin, x, std::vector<double>{1}), ContractError);
    CHECK_THROWS_AS(kernel_eval(KernelParams{KernelKind::rbf}, x, y), ContractError);
}

TEST_CASE("kernel names") {
    for (KernelKind k : kAllKernels) CHECK(parse_kernel_kind(to_string(k)) == k);
    CHECK(parse_kernel_kind("poly") == KernelKind::polynomial);
    CHECK_THROWS_AS(parse_kernel_kind("cubic"), FormatError);
}

TEST_CASE("parameter validation") {
    SvrParams p;
    p.C = 0;
    CHECK_THROWS_AS(p.validate(), ContractError);
    p = SvrParams{};
    p.epsilon = -1;
    CHECK_THROWS_AS(p.validate(), ContractError);
    p = SvrParams{};
    p.tol = 0;
    CHECK_THROWS_AS(p.validate(), ContractError);
    p = SvrParams{};
    p.kernel.degree = 0;
    CHECK_THROWS_AS(p.validate(), ContractError);
    p = SvrParams{};
    p.kernel.gamma = -1;
    CHECK_THROWS_AS(p.validate(), ContractError);
}

TEST_CASE("constant target: zero coefficients, exact prediction") {
    const Matrix X = Matrix::from_rows({{0}, {1}, {2}});
    const std::vector<double> y{5, 5, 5};
    for (KernelKind k : kAllKernels) {
        const SvrModel m = svr_fit(X, y, params(k));
        for (double c : m.dual_coefs) CHECK(c == 0.0);
        for (double x : {-10.0, 0.0, 0.5, 3.0, 1e6}) CHECK(svr_predict(m, std::vector<double>{x}) == 5.0);
    }
}

TEST_CASE("single training point predicts its target") {
    const Matrix X = Matrix::from_rows({{3, -1}});
    const std::vector<double> y{42.5};
    for (KernelKind k : kAllKernels) {
        const SvrModel m = svr_fit(X, y, params(k));
        CHECK(svr_predict(m, std::vector<double>{0, 0}) == 42.5);
        CHECK(svr_predict(m, std::vector<double>{-5, 9}) == 42.5);
    }
}

TEST_CASE("noiseless linear data") {
    const Matrix X = Matrix::from_rows({{0}, {1}, {2}});
    const std::vector<double> y{0, 1, 2};
    const SvrModel m = svr_fit(X, y, params(KernelKind::linear, 100, 0.01));
    CHECK(m.converged);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(svr_predict(m, X.row(i)) - y[i]) <= 0.011);
    CHECK(svr_predict(m, std::vector<double>{1.5}) == doctest::Approx(1.5).epsilon(0.011 / 1.5));
}

TEST_CASE("fit rejects bad input") {
    CHECK_THROWS_AS(svr_fit(Matrix(0, 1), std::vector<double>{}, SvrParams{}), ContractError);
    const Matrix X = Matrix::from_rows({{0}, {1}});
    CHECK_THROWS_AS(svr_fit(X, std::vector<double>{0, NAN}, SvrParams{}), ContractError);
    CHECK_THROWS_AS(svr_fit(Matrix::from_rows({{0}, {INFINITY}}), std::vector<double>{0, 1}, SvrParams{}),
                    ContractError);
    CHECK_THROWS_AS(Matrix::from_rows({{0}, {1, 2}}), ContractError);
    const SvrModel m = svr_fit(X, std::vector<double>{0, 1}, SvrParams{});
    CHECK_THROWS_AS(svr_predict(m, std::vector<double>{0, 1}), ContractError);
}

TEST_CASE("dual feasibility, KKT and monotone objective on random data") {
    synthetic::Rng rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng.next() % 25;
        const std::size_t d = 1 + rng.next() % 3;
        const Matrix X = random_matrix(rng, n, d);
        std::vector<double> y(n);
        for (double& v : y) v = rng.normal() * 10;
        SvrParams p = params(kAllKernels[trial % 4], 0.1 + 5 * rng.uniform(), 0.05 + 0.2 * rng.uniform());
        p.tol = 1e-5;
        if (p.kernel.kind == KernelKind::polynomial) p.kernel.coef0 = 1.0;
        FitTrace trace;
        const SvrModel m = svr_fit(X, y, p, &trace);
        CHECK(m.converged);
        CHECK(m.kkt_violation <= p.tol);
        CHECK(m.support_vectors.rows() == m.dual_coefs.size());
        double sum = 0;
        for (double c : m.dual_coefs) {
            CHECK(std::abs(c) <= p.C + 1e-9);
            sum += c;
        }
        CHECK(std::abs(sum) <= 1e-8 * p.C * static_cast<double>(n));
        for (std::size_t i = 1; i < trace.dual_objective.size(); ++i) {
            CHECK(trace.dual_objective[i] >= trace.dual_objective[i - 1] - 1e-12);
        }
        // Prediction on a training row reproduces the decision formula.
        const std::vector<double> xs = m.scaler.apply(X.row(0));
        CHECK(svr_predict(m, X.row(0)) == m.scaler.invert_target(svr_decision(m, xs)));
    }
}

TEST_CASE("KKT recomputed from the model") {
    synthetic::Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 3 + rng.next() % 15;
        const Matrix X = random_matrix(rng, n, 2);
        std::vector<double> y(n);
        for (double& v : y) v = rng.normal();
        SvrParams p = params(kAllKernels[trial % 4], 0.5 + 2 * rng.uniform(), 0.1);
        p.tol = 1e-6;
        const SvrModel m = svr_fit(X, y, p);
        std::vector<double> beta(n, 0.0);
        for (std::size_t k = 0; k < m.support_index.size(); ++k) beta[m.support_index[k]] = m.dual_coefs[k];
        // Gradient-based gap: for every i, f(x_i) - y_i must lie in the interval
        // the KKT conditions allow for beta_i.
        const Matrix Z = m.scaler.apply(X);
        double up = -INFINITY;
        double low = INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            double f = 0;
            for (std::size_t j = 0; j < n; ++j) f += beta[j] * kernel_eval(m.params.kernel, Z.row(i), Z.row(j));
            const double yi = m.scaler.apply_target(y[i]);
            const double e = p.epsilon;
            // Bias-free conditions: b must satisfy lo_i <= b <= hi_i.
            double lo = -INFINITY;
            double hi = INFINITY;
            const double C = p.C;
            if (beta[i] > 1e-12) {  // alpha > 0: yi - f - b >= e (= if alpha < C)
                hi = std::min(hi, yi - f - e);
                if (beta[i] < C - 1e-12) lo = std::max(lo, yi - f - e);
            } else if (beta[i] < -1e-12) {
                lo = std::max(lo, yi - f + e);
                if (beta[i] > -C + 1e-12) hi = std::min(hi, yi - f + e);
            } else {
                lo = std::max(lo, yi - f - e);
                hi = std::min(hi, yi - f + e);
            }
            up = std::max(up, lo);
            low = std::min(low, hi);
        }
        CHECK(up - low <= p.tol + 1e-9);
    }
}

TEST_CASE("permutation invariance") {
    synthetic::Rng rng(31);
    for (KernelKind k : kAllKernels) {
        const std::size_t n = 20;
        const Matrix X = random_matrix(rng, n, 2);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = X(i, 0) * 3 - X(i, 1) + 0.1 * rng.normal();
        SvrParams p = params(k);
        p.tol = 1e-10;
        const SvrModel a = svr_fit(X, y, p);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.next() % (i + 1)]);
        std::vector<double> yp(n);
        for (std::size_t i = 0; i < n; ++i) yp[i] = y[perm[i]];
        const SvrModel b = svr_fit(X.select_rows(perm), yp, p);
        for (int q = 0; q < 10; ++q) {
            const std::vector<double> x{rng.normal(), rng.normal()};
            CHECK(std::abs(svr_predict(a, x) - svr_predict(b, x)) <= 1e-6);
        }
    }
}

TEST_CASE("affine rescaling of a feature is absorbed by the scaler") {
    synthetic::Rng rng(37);
    for (KernelKind k : {KernelKind::linear, KernelKind::rbf}) {
        const std::size_t n = 25;
        Matrix X = random_matrix(rng, n, 2);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(X(i, 0)) + X(i, 1);
        SvrParams p = params(k);
        p.tol = 1e-10;
        const SvrModel a = svr_fit(X, y, p);
        Matrix X10 = X;
        for (std::size_t i = 0; i < n; ++i) X10(i, 0) *= 10;
        const SvrModel b = svr_fit(X10, y, p);
        for (int q = 0; q < 10; ++q) {
            const std::vector<double> x{rng.normal(), rng.normal()};
            const std::vector<double> x10{x[0] * 10, x[1]};
            CHECK(std::abs(svr_predict(a, x) - svr_predict(b, x10)) <= 1e-6);
        }
    }
}

TEST_CASE("gamma scale resolution") {
    const Matrix X = Matrix::from_rows({{1, 5}, {2, 5}, {3, 5}, {4, 5}});
    const SvrModel m = svr_fit(X, std::vector<double>{1, 2, 3, 4}, params(KernelKind::rbf));
    REQUIRE(m.params.kernel.gamma.has_value());
    // Standardized entries: column 0 has variance 1, column 1 is all zero, so
    // the pooled variance is 1/2 and gamma = 1 / (2 * 0.5).
    CHECK(*m.params.kernel.gamma == doctest::Approx(1.0));
}

TEST_CASE("iteration cap is reported") {
    synthetic::Rng rng(41);
    const Matrix X = random_matrix(rng, 30, 2);
    std::vector<double> y(30);
    for (double& v : y) v = rng.normal();
    SvrParams p = params(KernelKind::rbf, 10, 0.01);
    p.tol = 1e-12;
    p.max_passes = 2;
    const SvrModel m = svr_fit(X, y, p);
    CHECK_FALSE(m.converged);
    CHECK(m.iterations == 2);
}

TEST_CASE("model JSON round-trip is bit-exact") {
    synthetic::Rng rng(43);
    for (KernelKind k : kAllKernels) {
        const Matrix X = random_matrix(rng, 15, 3);
        std::vector<double> y(15);
        for (double& v : y) v = rng.normal() * 1000 + 5000;
        SvrParams p = params(k, 2.0, 0.05);
        p.kernel.coef0 = 0.5;
        p.seed = 99;
        const SvrModel m = svr_fit(X, y, p);
        std::ostringstream out;
        save_model(m, out);
        std::istringstream in(out.str());
        const SvrModel back = load_model(in);
        CHECK(back.params == m.params);
        CHECK(back.scaler == m.scaler);
        CHECK(back.dual_coefs == m.dual_coefs);
        CHECK(back.bias == m.bias);
        for (int q = 0; q < 10; ++q) {
            const std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
            CHECK(svr_predict(back, x) == svr_predict(m, x));
        }
    }
}

TEST_CASE("model JSON errors") {
    const SvrModel m = svr_fit(Matrix::from_rows({{0}, {1}}), std::vector<double>{0, 1}, SvrParams{});
    std::ostringstream out;
    save_model(m, out);
    auto doc = nlohmann::json::parse(out.str());

    auto no_bias = doc;
    no_bias.erase("bias");
    std::istringstream in1(no_bias.dump());
    try {
        load_model(in1);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("bias") != std::string::npos);
    }

    auto v99 = doc;
    v99["version"] = 99;
    std::istringstream in2(v99.dump());
    CHECK_THROWS_AS(load_model(in2), UnsupportedVersionError);

    auto ragged = doc;
    ragged["dual_coefs"].push_back(1.0);
    std::istringstream in3(ragged.dump());
    CHECK_THROWS_AS(load_model(in3), FormatError);

    std::istringstream in4("{not json");
    CHECK_THROWS_AS(load_model(in4), FormatError);
}

TEST_CASE("grid_search") {
    // y = x^2 on a symmetric interval: a linear fit cannot rank the validation points.
    Matrix X(0, 1);
    std::vector<double> y;
    for (int i = 0; i <= 60; ++i) {
        const double x = -3.0 + 0.1 * i;
        X.append_row(std::vector<double>{x});
        y.push_back(x * x);
    }
    ValidationSplit split;
    for (std::size_t i = 0; i < y.size(); ++i) (i % 3 == 0 ? split.validation : split.train).push_back(i);

    SvrParams lin = params(KernelKind::linear, 10, 0.01);
    SvrParams poly = params(KernelKind::polynomial, 10, 0.01);
    poly.kernel.degree = 2;
    poly.kernel.coef0 = 1;

    SUBCASE("single candidate") {
        const std::vector<SvrParams> grid{lin};
        CHECK(grid_search(X, y, grid, split).best == lin);
    }
    SUBCASE("quadratic data prefers the polynomial kernel") {
        const std::vector<SvrParams> grid{lin, poly};
        const auto r = grid_search(X, y, grid, split);
        CHECK(r.best == poly);
        REQUIRE(r.scores.size() == 2);
        CHECK(*r.scores[1].spearman > r.scores[0].spearman.value_or(-2));
    }
    SUBCASE("ties go to the smaller C") {
        SvrParams big = poly;
        big.C = 20;
        const std::vector<SvrParams> grid{big, poly};
        // Both fit the parabola with the same ranking.
        const auto r = grid_search(X, y, grid, split);
        REQUIRE(r.scores[0].spearman == r.scores[1].spearman);
        CHECK(r.best.C == 10);
    }
    SUBCASE("degenerate validation targets") {
        std::vector<double> flat = y;
        for (std::size_t i : split.validation) flat[i] = 1.0;
        const std::vector<SvrParams> grid{lin};
        CHECK_THROWS_AS(grid_search(X, flat, grid, split), DegenerateDataError);
    }
}

}  // TEST_SUITE
