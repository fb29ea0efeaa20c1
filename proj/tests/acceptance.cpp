// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "mpbia/cli.hpp"
#include "mpbia/config.hpp"
#include "mpbia/electromech.hpp"
#include "mpbia/error.hpp"
#include "mpbia/inference.hpp"
#include "mpbia/probabilistic.hpp"
#include "mpbia/sweep.hpp"
#include "mpbia/toy_full.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mpbia;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Largest |integral - 1| over every posterior this binary builds.
double g_worst_normalization = 0.0;
std::size_t g_posterior_count = 0;

PosteriorGrid tracked(PosteriorGrid g) {
    g_worst_normalization = std::max(g_worst_normalization, std::abs(trapezoid_integral(g.axes, g.density) - 1.0));
    ++g_posterior_count;
    return g;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

struct Fig9Setup {
    electromech::ElectromechModel model;
    TruncatedNormalPrior prior = electromech_prior();
    std::vector<double> truth{11e3, 0.35};
    Axes axes;
    FieldObservations y1;
    std::vector<double> ll1;
    double ig_single = 0.0;

    Fig9Setup() {
        const std::size_t counts[] = {100, 100};
        axes = cdf_spaced_grid(prior, counts);
        y1 = synthesize_observations(model, truth, 1, linspace(0.0, 0.4, 16), 50.0);
        ll1 = grid_log_likelihood(model, axes, std::vector<FieldObservations>{y1});
        ig_single = information_gain(tracked(evaluate_posterior(prior, ll1, axes)), prior);
    }

    [[nodiscard]] double riig_for(std::size_t n2, double snr2) const {
        const FieldObservations y2 = synthesize_observations(model, truth, 2, linspace(0.0, 0.4, n2), snr2);
        std::vector<double> ll = grid_log_likelihood(model, axes, std::vector<FieldObservations>{y2});
        for (std::size_t i = 0; i < ll.size(); ++i) ll[i] += ll1[i];
        const double ig_multi = information_gain(tracked(evaluate_posterior(prior, std::move(ll), axes)), prior);
        return riig(ig_single, ig_multi);
    }
};

Outcome criterion_1(double& riig_middle) {
    const auto start = std::chrono::steady_clock::now();
    const Fig9Setup setup;
    riig_middle = setup.riig_for(2, 1.2e4);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = std::abs(riig_middle - 1.23) <= 0.15 && seconds < 60.0;
    return {ok, "RIIG " + fmt(riig_middle) + " (target 1.23 +- 0.15), " + fmt(seconds) + " s"};
}

Outcome criterion_2(double riig_middle) {
    const Fig9Setup setup;
    const double r = setup.riig_for(256, 80.0);
    const double gap = std::abs(riig_middle - r);
    const bool ok = std::abs(r - 1.22) <= 0.15 && gap <= 0.1;
    return {ok, "RIIG " + fmt(r) + " (target 1.22 +- 0.15), |middle - right| " + fmt(gap)};
}

Outcome criterion_3() {
    const Fig9Setup setup;
    const double r = setup.riig_for(256, 1.2e4);
    return {std::abs(r - 3.65) <= 0.4, "RIIG " + fmt(r) + " (target 3.65 +- 0.4)"};
}

bool monotone(const std::vector<double>& values, std::size_t rows, std::size_t cols, double slack,
              std::string& where) {
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = values[i * cols + j];
            if ((j > 0 && v < values[i * cols + j - 1] - slack) || (i > 0 && v < values[(i - 1) * cols + j] - slack)) {
                where = "cell (" + std::to_string(i) + "," + std::to_string(j) + ")";
                return false;
            }
        }
    }
    return true;
}

Outcome criterion_4() {
    const electromech::ElectromechModel model;
    const SweepSpec spec = default_sweep_spec();
    const std::vector<SweepResult> results = run_riig_sweep(model, spec);
    std::vector<double> r;
    for (const SweepResult& c : results) {
        if (!c.ok()) return {false, "cell failed: " + c.status};
        r.push_back(c.riig);
    }
    std::string where;
    const bool ok = monotone(r, spec.n_obs2_axis.size(), spec.snr2_axis.size(), 0.02, where);
    return {ok, ok ? "10x6 surface non-decreasing in both axes (slack 0.02)" : "decrease at " + where};
}

Outcome criterion_5() {
    using namespace electromech;
    std::mt19937_64 rng(20231015);
    std::uniform_real_distribution<double> ue(2e3, 3e4);
    std::uniform_real_distribution<double> unu(0.0, 0.49);
    std::uniform_real_distribution<double> ud(0.0, 5e-3);
    std::uniform_real_distribution<double> ui(0.01, 0.2);
    std::uniform_real_distribution<double> uf(0.0, 0.8);
    double worst = 0.0;
    bool zero_exact = true;
    for (int k = 0; k < 100; ++k) {
        ElectromechParams p;
        p.youngs_modulus = ue(rng);
        p.poisson_ratio = unu(rng);
        double d = ud(rng);
        while (cross_section_radicand(d, p) <= 0.0) d = ud(rng);
        const double current = ui(rng);
        const double force = uf(rng);
        const Eigen::Matrix2d j = jacobian({d, current}, p, force);
        if (j(0, 1) != 0.0) zero_exact = false;

        const double hd = 1e-6 * p.side_length;
        const double hi = 1e-6 * current;
        const double fd[3] = {
            (residual_mech(d + hd, p, force) - residual_mech(d - hd, p, force)) / (2.0 * hd),
            (residual_elec(d + hd, current, p) - residual_elec(d - hd, current, p)) / (2.0 * hd),
            (residual_elec(d, current + hi, p) - residual_elec(d, current - hi, p)) / (2.0 * hi)};
        const double exact[3] = {j(0, 0), j(1, 0), j(1, 1)};
        for (int e = 0; e < 3; ++e) worst = std::max(worst, std::abs(exact[e] - fd[e]) / std::abs(exact[e]));
    }
    return {worst <= 1e-6 && zero_exact,
            "max relative FD error " + fmt(worst) + " over 100 states, df1/dI exactly zero: " +
                (zero_exact ? "yes" : "no")};
}

Outcome criterion_6() {
    using namespace electromech;
    const ElectromechParams p;
    EvaluateOptions mono;
    mono.mode = SolveMode::Monolithic;
    EvaluateOptions seq;
    seq.mode = SolveMode::Sequential;
    const Evaluation z = evaluate(p, 0.0, mono);
    bool ok = std::abs(z.state.displacement) <= 1e-12 && std::abs(z.state.current - 0.1) <= 1e-12;
    double worst_gap = 0.0;
    int worst_iterations = 0;
    for (double force : linspace(0.0, 0.4, 16)) {
        const Evaluation a = evaluate(p, force, mono);
        const Evaluation b = evaluate(p, force, seq);
        worst_gap = std::max(worst_gap, std::hypot(a.state.displacement - b.state.displacement,
                                                   a.state.current - b.state.current));
        worst_iterations = std::max({worst_iterations, a.iterations, b.iterations});
    }
    ok = ok && worst_gap <= 1e-10 && worst_iterations <= 10;
    return {ok, "F=0 -> (" + fmt(z.state.displacement) + " m, " + fmt(z.state.current) + " A), mono/seq gap " +
                    fmt(worst_gap) + ", max iterations " + std::to_string(worst_iterations)};
}

/// Observation operator of the conjugate problem: y = x0 + x1 c.
class LinearModel final : public ForwardModel {
public:
    [[nodiscard]] std::string name() const override { return "linear"; }
    [[nodiscard]] std::size_t parameter_count() const override { return 2; }
    [[nodiscard]] std::size_t field_count() const override { return 1; }
    [[nodiscard]] std::size_t output_dim(FieldId) const override { return 1; }
    [[nodiscard]] std::vector<double> evaluate_field(std::span<const double> x, FieldId,
                                                     std::span<const double> coordinates) const override {
        std::vector<double> out;
        for (double c : coordinates) out.push_back(x[0] + x[1] * c);
        return out;
    }
};

Outcome criterion_7() {
    const LinearModel model;
    const TruncatedNormalPrior prior{{1.0, -0.5}, {1.0, 4.0}, {-kInf, -kInf}, {kInf, kInf}};
    const std::vector<double> coords{-1.0, 0.0, 0.5, 2.0};
    const FieldObservations obs = synthesize_observations(model, std::vector<double>{1.3, 0.2}, 1, coords, 3.0);

    Eigen::MatrixXd h(4, 2);
    Eigen::VectorXd y(4);
    for (int i = 0; i < 4; ++i) {
        h(i, 0) = 1.0;
        h(i, 1) = coords[static_cast<std::size_t>(i)];
        y(i) = obs.values[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector2d m0(1.0, -0.5);
    const Eigen::Matrix2d p0 = Eigen::Vector2d(1.0, 4.0).asDiagonal();
    const Eigen::MatrixXd precision = p0.inverse() + h.transpose() * h / obs.noise_variance;
    const Eigen::MatrixXd cov = precision.inverse();
    const Eigen::VectorXd mean = cov * (p0.inverse() * m0 + h.transpose() * y / obs.noise_variance);
    const double analytic = kl_gaussians(m0, p0, mean, cov);

    const Axes axes{linspace(-7.0, 9.0, 200), linspace(-16.5, 15.5, 200)};
    const PosteriorGrid post = tracked(
        evaluate_posterior(prior, grid_log_likelihood(model, axes, std::vector<FieldObservations>{obs}), axes));
    const double grid_ig = information_gain(post, prior);

    const TruncatedNormalPrior em = electromech_prior();
    const std::size_t counts[] = {100, 100};
    const Axes em_axes = cdf_spaced_grid(em, counts);
    const double no_data = information_gain(tracked(evaluate_posterior(em, std::vector<double>(10000, 0.0), em_axes)), em);

    const double gap = std::abs(grid_ig - analytic);
    const bool ok = gap <= 1e-3 && std::abs(no_data) <= 1e-9;
    return {ok, "grid IG " + fmt(grid_ig) + " vs closed form " + fmt(analytic) + " (gap " + fmt(gap) +
                    "), no-data IG " + fmt(no_data)};
}

Outcome criterion_8() {
    const electromech::ElectromechModel model;
    const SweepSpec spec = full_sweep_spec();
    const std::vector<SweepResult> results = run_riig_sweep(model, spec);
    double min_ig = kInf;
    std::size_t small_negative = 0;
    bool ok = true;
    for (const SweepResult& r : results) {
        if (!r.ok()) {
            ok = false;
            continue;
        }
        min_ig = std::min({min_ig, r.ig_single, r.ig_multi});
        if (r.ig_multi < -1e-6) ok = false;
        if (r.ig_multi < 0.0 && r.ig_multi >= -1e-6) {
            ++small_negative;
            std::cout << "  note: IG " << fmt(r.ig_multi) << " at n_obs2=" << r.n_obs2 << ", snr2=" << fmt(r.snr2)
                      << " (numerical artifact)\n";
        }
    }
    // The sweep's posteriors are internal; rebuild the single-physics one and the extreme corner here.
    const SinglePhysicsStage stage = run_single_physics(model, spec);
    (void)tracked(stage.posterior);

    // Toy fully coupled fixture: normalization, Gibbs and the trend over coupling strength.
    const toy::ToyFullModel toy_model(0.5);
    const TruncatedNormalPrior toy_prior = toy::toy_prior();
    const std::vector<double> truth{toy::kToyTruth[0], toy::kToyTruth[1]};
    const std::size_t counts[] = {60, 60};
    const Axes axes = cdf_spaced_grid(toy_prior, counts);
    const std::vector<double> c = linspace(0.1, 1.0, 8);
    const FieldObservations t1 = synthesize_observations(toy_model, truth, 1, c, 20.0);
    const FieldObservations t2 = synthesize_observations(toy_model, truth, 2, c, 200.0);
    const double toy_single = information_gain(
        tracked(evaluate_posterior(toy_prior, grid_log_likelihood(toy_model, axes, std::vector<FieldObservations>{t1}),
                                   axes)),
        toy_prior);
    const double toy_multi = information_gain(
        tracked(evaluate_posterior(
            toy_prior, grid_log_likelihood(toy_model, axes, std::vector<FieldObservations>{t1, t2}), axes)),
        toy_prior);
    ok = ok && toy_single >= -1e-6 && toy_multi >= -1e-6;

    const bool normalized = g_worst_normalization <= 1e-9;
    ok = ok && normalized;
    return {ok, std::to_string(results.size()) + " sweep cells, min IG " + fmt(min_ig) + ", " +
                    std::to_string(small_negative) + " small negatives; " + std::to_string(g_posterior_count) +
                    " posteriors, worst |integral - 1| " + fmt(g_worst_normalization) + "; toy RIIG " +
                    fmt(riig(toy_single, toy_multi))};
}

std::map<std::string, std::string> directory_contents(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        files[fs::relative(entry.path(), dir).string()] = ss.str();
    }
    return files;
}

Outcome criterion_9() {
    const fs::path root = fs::temp_directory_path() / "mpbia_acceptance_determinism";
    fs::remove_all(root);
    std::ostringstream log;
    const RunConfig config = default_config();
    (void)cli::cmd_reproduce("fig9", config, false, root / "a", log);
    (void)cli::cmd_reproduce("fig9", config, false, root / "b", log);
    const auto a = directory_contents(root / "a");
    const bool reproduce_ok = !a.empty() && a == directory_contents(root / "b");
    fs::remove_all(root);

    const electromech::ElectromechModel model;
    SweepSpec spec = default_sweep_spec();
    std::ostringstream one;
    std::ostringstream eight;
    spec.workers = 1;
    export_sweep_csv(one, run_riig_sweep(model, spec));
    spec.workers = 8;
    export_sweep_csv(eight, run_riig_sweep(model, spec));
    const bool workers_ok = one.str() == eight.str();
    return {reproduce_ok && workers_ok,
            std::string("fig9 artifacts (") + std::to_string(a.size()) + " files) byte-identical: " +
                (reproduce_ok ? "yes" : "no") + "; sweep 1 vs 8 workers identical: " + (workers_ok ? "yes" : "no")};
}

Outcome criterion_10() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> value(-5.0, 5.0);
    std::uniform_real_distribution<double> log_snr(-3.0, 6.0);
    std::uniform_int_distribution<int> size(1, 40);
    std::uniform_int_distribution<int> dim(1, 3);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = static_cast<std::size_t>(dim(rng));
        std::vector<double> outputs(static_cast<std::size_t>(size(rng)) * d);
        for (double& v : outputs) v = value(rng) * std::pow(10.0, log_snr(rng));
        const double snr = std::pow(10.0, log_snr(rng));
        const double sigma2 = sigma_from_snr(outputs, d, snr);
        worst = std::max(worst, std::abs(snr_from_sigma(outputs, d, sigma2) - snr) / snr);
    }
    return {worst <= 1e-12, "max relative round-trip error " + fmt(worst) + " over 1000 random output sets"};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << std::endl;
        if (!o.pass) ++failures;
    };

    double riig_middle = std::nan("");
    report(1, [&] { return criterion_1(riig_middle); });
    report(2, [&] { return criterion_2(riig_middle); });
    report(3, criterion_3);
    report(4, criterion_4);
    report(5, criterion_5);
    report(6, criterion_6);
    report(7, criterion_7);
    report(8, criterion_8);
    report(9, criterion_9);
    report(10, criterion_10);

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
