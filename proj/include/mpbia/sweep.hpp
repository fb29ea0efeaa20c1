#pragma once

// Parameter studies over observation configurations: the N_obs,2 x SNR_2 RIIG
// surface with fixed first-field data, and the SNR_1 x SNR_2 x coupling-strength
// study over any model family indexed by a coupling parameter.

#include "mpbia/forward_model.hpp"
#include "mpbia/inference.hpp"
#include "mpbia/probabilistic.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mpbia {

/// `count` coordinates equidistant on [coord_min, coord_max] (both ends included).
struct ObservationConfig {
    std::size_t count = 16;
    double snr = 50.0;
    double coord_min = 0.0;
    double coord_max = 0.4;

    [[nodiscard]] std::vector<double> coordinates() const;
};

/// n points evenly spaced on [lo, hi]; a single point sits at lo.
[[nodiscard]] std::vector<double> linspace(double lo, double hi, std::size_t n);

/// n log-spaced values on [lo, hi], both ends included.
[[nodiscard]] std::vector<double> log_spaced(double lo, double hi, std::size_t n);

/// n strictly increasing integers, log-spaced on [lo, hi]: each value is
/// round(lo (hi/lo)^(i/(n-1))) lifted to at least its predecessor + 1.
[[nodiscard]] std::vector<std::size_t> log_spaced_counts(std::size_t lo, std::size_t hi, std::size_t n);

struct SweepSpec {
    ObservationConfig first_field{16, 50.0, 0.0, 0.4};
    /// Coordinate range of the second field; its count and SNR come from the axes.
    double second_coord_min = 0.0;
    double second_coord_max = 0.4;
    std::vector<std::size_t> n_obs2_axis;
    std::vector<double> snr2_axis;
    std::vector<double> x_true;
    TruncatedNormalPrior prior;
    std::vector<std::size_t> grid_points{100, 100};
    LikelihoodScale scale = LikelihoodScale::Gaussian;
    int workers = 1;

    /// Throws DomainError on empty or non-increasing axes, zero counts,
    /// non-positive SNRs, or an invalid prior.
    void validate() const;
};

/// The 10 x 6 desk-scale axes (N_obs,2 in [1, 256], SNR_2 in [10, 1.2e4]).
[[nodiscard]] SweepSpec default_sweep_spec();
/// Same bounds at 50 x 12.
[[nodiscard]] SweepSpec full_sweep_spec();

struct SweepResult {
    std::size_t n_obs2 = 0;
    double snr2 = 0.0;
    double ig_single = 0.0;
    double ig_multi = 0.0;
    double riig = 0.0;
    double boundary_mass = 0.0;
    std::size_t failed_nodes = 0;
    /// "ok" or "failed:<reason>"
    std::string status = "ok";

    [[nodiscard]] bool ok() const noexcept { return status == "ok"; }
};

/// Shared single-physics stage of a sweep.
struct SinglePhysicsStage {
    Axes axes;
    FieldObservations first_observations;
    std::vector<double> first_log_likelihood;
    PosteriorGrid posterior;
    double information_gain = 0.0;
};

[[nodiscard]] SinglePhysicsStage run_single_physics(const ForwardModel& model, const SweepSpec& spec);

/// One result per (n_obs2, snr2) cell in axis-major order (n_obs2 outer).
/// The single-physics information gain is computed once and shared; cell
/// failures are recorded in the result and never abort the sweep.
[[nodiscard]] std::vector<SweepResult> run_riig_sweep(const ForwardModel& model, const SweepSpec& spec,
                                                      const std::function<void(std::size_t, std::size_t)>& progress = {});

/// CSV `n_obs2,snr2,ig_single,ig_multi,riig,boundary_mass,status`.
void export_sweep_csv(std::ostream& out, const std::vector<SweepResult>& results);
void export_sweep_csv(const std::string& path, const std::vector<SweepResult>& results);

/// Model family indexed by a coupling-strength parameter.
using ModelFactory = std::function<std::unique_ptr<ForwardModel>(double coupling)>;

struct CouplingSweepSpec {
    ObservationConfig first_field{8, 50.0, 0.1, 1.0};
    ObservationConfig second_field{8, 50.0, 0.1, 1.0};
    std::vector<double> snr1_axis;
    std::vector<double> snr2_axis;
    std::vector<double> coupling_axis;
    std::vector<double> x_true;
    TruncatedNormalPrior prior;
    std::vector<std::size_t> grid_points{60, 60};
    LikelihoodScale scale = LikelihoodScale::Gaussian;
    int workers = 1;

    void validate() const;
};

struct CouplingSweepResult {
    double snr1 = 0.0;
    double snr2 = 0.0;
    double coupling = 0.0;
    double ig_single = 0.0;
    double ig_multi = 0.0;
    double riig = 0.0;
    double boundary_mass = 0.0;
    std::string status = "ok";

    [[nodiscard]] bool ok() const noexcept { return status == "ok"; }
};

/// Results ordered coupling-major, then snr1, then snr2.
[[nodiscard]] std::vector<CouplingSweepResult> run_coupling_sweep(const ModelFactory& factory,
                                                                  const CouplingSweepSpec& spec);

/// CSV `coupling,snr1,snr2,ig_single,ig_multi,riig,boundary_mass,status`.
void export_coupling_sweep_csv(std::ostream& out, const std::vector<CouplingSweepResult>& results);

}  // namespace mpbia
