#include "mpbia/sweep.hpp"

#include "mpbia/error.hpp"
#include "mpbia/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace mpbia {

namespace {

void require_increasing(const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw DomainError(std::string(name) + " axis is empty");
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (!(axis[i] > 0.0) || !std::isfinite(axis[i])) {
            throw DomainError(std::string(name) + " axis values must be positive and finite");
        }
        if (i > 0 && !(axis[i] > axis[i - 1])) {
            throw DomainError(std::string(name) + " axis must be strictly increasing");
        }
    }
}

void validate_observation_config(const ObservationConfig& cfg, const char* name) {
    if (!(cfg.snr > 0.0)) throw DomainError(std::string(name) + ": SNR must be positive");
    if (!(cfg.coord_max >= cfg.coord_min)) throw DomainError(std::string(name) + ": empty coordinate range");
}

std::string failure_status(const std::string& what) {
    std::string reason = what;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    std::replace(reason.begin(), reason.end(), '\r', ' ');
    return "failed:" + reason;
}

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

}  // namespace

std::vector<double> ObservationConfig::coordinates() const { return linspace(coord_min, coord_max, count); }

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    if (n > 1) out.back() = hi;
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("log_spaced needs 0 < lo <= hi");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<std::size_t> log_spaced_counts(std::size_t lo, std::size_t hi, std::size_t n) {
    if (lo < 1 || hi < lo) throw DomainError("log_spaced_counts needs 1 <= lo <= hi");
    const std::vector<double> raw = log_spaced(static_cast<double>(lo), static_cast<double>(hi), n);
    std::vector<std::size_t> out;
    out.reserve(n);
    for (double v : raw) {
        auto k = static_cast<std::size_t>(std::llround(v));
        if (!out.empty()) k = std::max(k, out.back() + 1);
        out.push_back(k);
    }
    return out;
}

void SweepSpec::validate() const {
    validate_observation_config(first_field, "first field");
    if (first_field.count == 0) throw DomainError("first field needs at least one observation");
    if (n_obs2_axis.empty()) throw DomainError("n_obs2 axis is empty");
    for (std::size_t i = 0; i < n_obs2_axis.size(); ++i) {
        if (n_obs2_axis[i] < 1) throw DomainError("n_obs2 axis counts must be at least 1");
        if (i > 0 && n_obs2_axis[i] <= n_obs2_axis[i - 1]) {
            throw DomainError("n_obs2 axis must be strictly increasing");
        }
    }
    require_increasing(snr2_axis, "snr2");
    prior.validate();
    if (x_true.size() != prior.dimension()) throw DomainError("x_true does not match the prior dimension");
    if (grid_points.size() != prior.dimension()) throw DomainError("grid resolution does not match the prior");
    if (!(second_coord_max >= second_coord_min)) throw DomainError("second field: empty coordinate range");
}

SweepSpec default_sweep_spec() {
    SweepSpec spec;
    spec.n_obs2_axis = log_spaced_counts(1, 256, 10);
    spec.snr2_axis = log_spaced(10.0, 1.2e4, 6);
    spec.x_true = {11.0e3, 0.35};
    spec.prior = electromech_prior();
    return spec;
}

SweepSpec full_sweep_spec() {
    SweepSpec spec = default_sweep_spec();
    spec.n_obs2_axis = log_spaced_counts(1, 256, 50);
    spec.snr2_axis = log_spaced(10.0, 1.2e4, 12);
    return spec;
}

SinglePhysicsStage run_single_physics(const ForwardModel& model, const SweepSpec& spec) {
    spec.validate();
    SinglePhysicsStage stage;
    stage.axes = cdf_spaced_grid(spec.prior, spec.grid_points);
    stage.first_observations =
        synthesize_observations(model, spec.x_true, 1, spec.first_field.coordinates(), spec.first_field.snr);
    const std::vector<FieldObservations> first{stage.first_observations};
    stage.first_log_likelihood = grid_log_likelihood(model, stage.axes, first, spec.scale, spec.workers);
    stage.posterior = evaluate_posterior(spec.prior, stage.first_log_likelihood, stage.axes);
    stage.information_gain = information_gain(stage.posterior, spec.prior);
    return stage;
}

std::vector<SweepResult> run_riig_sweep(const ForwardModel& model, const SweepSpec& spec,
                                        const std::function<void(std::size_t, std::size_t)>& progress) {
    const SinglePhysicsStage single = run_single_physics(model, spec);
    const std::size_t rows = spec.n_obs2_axis.size();
    const std::size_t cols = spec.snr2_axis.size();
    std::vector<SweepResult> results(rows * cols);

    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t n2 = spec.n_obs2_axis[r];
        const std::vector<double> coords = linspace(spec.second_coord_min, spec.second_coord_max, n2);
        std::optional<GridFieldOutputs> outputs;
        std::string row_failure;
        try {
            outputs = evaluate_grid_outputs(model, single.axes, 2, coords, spec.workers);
        } catch (const Error& e) {
            row_failure = e.what();
        }

        parallel_for(cols, spec.workers, [&](std::size_t c) {
            SweepResult& cell = results[r * cols + c];
            cell.n_obs2 = n2;
            cell.snr2 = spec.snr2_axis[c];
            cell.ig_single = single.information_gain;
            try {
                if (!outputs) throw Error(row_failure);
                const FieldObservations obs2 = synthesize_observations(model, spec.x_true, 2, coords, cell.snr2);
                const std::vector<double> ll =
                    add(single.first_log_likelihood, grid_log_likelihood(*outputs, obs2, spec.scale));
                const PosteriorGrid post = evaluate_posterior(spec.prior, ll, single.axes);
                cell.ig_multi = information_gain(post, spec.prior);
                cell.riig = riig(cell.ig_single, cell.ig_multi);
                cell.boundary_mass = post.boundary_mass;
                cell.failed_nodes = post.failed_nodes;
            } catch (const Error& e) {
                cell.status = failure_status(e.what());
            }
        });
        if (progress) progress(r + 1, rows);
    }
    return results;
}

void export_sweep_csv(std::ostream& out, const std::vector<SweepResult>& results) {
    if (results.empty()) throw DomainError("no sweep results to export");
    out << "n_obs2,snr2,ig_single,ig_multi,riig,boundary_mass,status\n";
    for (const SweepResult& r : results) {
        out << r.n_obs2 << ',' << format_double(r.snr2) << ',';
        if (r.ok()) {
            out << format_double(r.ig_single) << ',' << format_double(r.ig_multi) << ',' << format_double(r.riig)
                << ',' << format_double(r.boundary_mass);
        } else {
            out << ",,,";
        }
        out << ',' << r.status << '\n';
    }
}

void export_sweep_csv(const std::string& path, const std::vector<SweepResult>& results) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    export_sweep_csv(out, results);
    if (!out) throw Error("failed writing '" + path + "'");
}

void CouplingSweepSpec::validate() const {
    validate_observation_config(first_field, "first field");
    validate_observation_config(second_field, "second field");
    require_increasing(snr1_axis, "snr1");
    require_increasing(snr2_axis, "snr2");
    if (coupling_axis.empty()) throw DomainError("coupling axis is empty");
    for (std::size_t i = 1; i < coupling_axis.size(); ++i) {
        if (!(coupling_axis[i] > coupling_axis[i - 1])) throw DomainError("coupling axis must be strictly increasing");
    }
    prior.validate();
    if (x_true.size() != prior.dimension()) throw DomainError("x_true does not match the prior dimension");
    if (grid_points.size() != prior.dimension()) throw DomainError("grid resolution does not match the prior");
}

std::vector<CouplingSweepResult> run_coupling_sweep(const ModelFactory& factory, const CouplingSweepSpec& spec) {
    spec.validate();
    const Axes axes = cdf_spaced_grid(spec.prior, spec.grid_points);
    const std::vector<double> coords1 = spec.first_field.coordinates();
    const std::vector<double> coords2 = spec.second_field.coordinates();
    const std::size_t n1 = spec.snr1_axis.size();
    const std::size_t n2 = spec.snr2_axis.size();
    std::vector<CouplingSweepResult> results(spec.coupling_axis.size() * n1 * n2);

    for (std::size_t k = 0; k < spec.coupling_axis.size(); ++k) {
        const double coupling = spec.coupling_axis[k];
        const std::unique_ptr<ForwardModel> model = factory(coupling);
        const GridFieldOutputs out1 = evaluate_grid_outputs(*model, axes, 1, coords1, spec.workers);
        const GridFieldOutputs out2 = evaluate_grid_outputs(*model, axes, 2, coords2, spec.workers);

        parallel_for(n1, spec.workers, [&](std::size_t i) {
            const double snr1 = spec.snr1_axis[i];
            double ig1 = 0.0;
            std::vector<double> ll1;
            std::string single_failure;
            try {
                const FieldObservations obs1 = synthesize_observations(*model, spec.x_true, 1, coords1, snr1);
                ll1 = grid_log_likelihood(out1, obs1, spec.scale);
                ig1 = information_gain(evaluate_posterior(spec.prior, ll1, axes), spec.prior);
            } catch (const Error& e) {
                single_failure = e.what();
            }
            for (std::size_t j = 0; j < n2; ++j) {
                CouplingSweepResult& cell = results[(k * n1 + i) * n2 + j];
                cell.coupling = coupling;
                cell.snr1 = snr1;
                cell.snr2 = spec.snr2_axis[j];
                cell.ig_single = ig1;
                try {
                    if (!single_failure.empty()) throw Error(single_failure);
                    const FieldObservations obs2 =
                        synthesize_observations(*model, spec.x_true, 2, coords2, cell.snr2);
                    const PosteriorGrid post =
                        evaluate_posterior(spec.prior, add(ll1, grid_log_likelihood(out2, obs2, spec.scale)), axes);
                    cell.ig_multi = information_gain(post, spec.prior);
                    cell.riig = riig(ig1, cell.ig_multi);
                    cell.boundary_mass = post.boundary_mass;
                } catch (const Error& e) {
                    cell.status = failure_status(e.what());
                }
            }
        });
    }
    return results;
}

void export_coupling_sweep_csv(std::ostream& out, const std::vector<CouplingSweepResult>& results) {
    if (results.empty()) throw DomainError("no sweep results to export");
    out << "coupling,snr1,snr2,ig_single,ig_multi,riig,boundary_mass,status\n";
    for (const CouplingSweepResult& r : results) {
        out << format_double(r.coupling) << ',' << format_double(r.snr1) << ',' << format_double(r.snr2) << ',';
        if (r.ok()) {
            out << format_double(r.ig_single) << ',' << format_double(r.ig_multi) << ',' << format_double(r.riig)
                << ',' << format_double(r.boundary_mass);
        } else {
            out << ",,,";
        }
        out << ',' << r.status << '\n';
    }
}

}  // namespace mpbia
