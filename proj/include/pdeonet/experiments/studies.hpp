#pragma once

#include "pdeonet/experiments/report.hpp"
#include "pdeonet/onet/onet.hpp"
#include "pdeonet/onet/plan.hpp"
#include "pdeonet/spectral/problem.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace pdeonet::experiments {

// Per-study random stream derived from the global seed.
std::mt19937_64 study_stream(std::uint64_t seed, const std::string& study);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // max |residual|
    double range = 0.0;    // max y - min y
};
// least squares y = intercept + slope x; throws PreconditionError for < 2 points
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Columns p,q,n_b,n_q,l2_error,h1_error,lambda_min,lambda_max; needs the
// manufactured solution. q = p + q_offset.
StudyReport convergence_study(const spectral::ProblemSpec& problem, int p_lo, int p_hi, int q_offset = 1);

struct CalibrationOptions {
    int p_lo = 3;
    int p_hi = 0;            // 0: 16 in 1-D, 8 in 2-D, 5 in 3-D
    int family_draws = 16;   // random coefficients added to the pilot; 0 uses the problem alone
    std::uint64_t seed = 1;
};

struct CalibrationResult {
    onet::Calibration calibration;
    double sup_u = 0.0;  // max Galerkin L2 norm over the pilot
    std::vector<spectral::CoefficientField> pilot;
    StudyReport report;
};

// Pilot convergence run over the problem coefficient (plus random draws of
// the same class); errors against the exact solution when known and the
// coefficient is the problem's own, else against a high-order reference.
CalibrationResult calibrate(const spectral::ProblemSpec& problem, const CalibrationOptions& options = {});

// random admissible coefficients of the class used for sup-over-D checks
std::vector<spectral::CoefficientField> test_family(const spectral::ProblemSpec& problem, int draws,
                                                    std::uint64_t seed);

// Columns N,delta,eps,size,depth,max_error,max_output_norm,pass.
StudyReport invnet_study(const std::vector<int>& Ns, const std::vector<double>& eps_range,
                         const std::vector<double>& deltas, int samples, std::uint64_t seed);

struct OnetStudyOptions {
    int test_draws = 20;
    std::uint64_t seed = 1;
    bool measure_error = true;
};

// Builds one ONet per target; columns eps,log_log_eps,p,n_b,n_q,
// eps_u,eps_b,branch_size,branch_depth,trunk_size,trunk_depth,h1_error.
// Build and evaluation times go to timings as build@<eps> and eval@<eps>.
// Fits slopes of log sizes against log|log eps|.
StudyReport size_scaling_study(const spectral::ProblemSpec& problem, const std::vector<double>& eps_range,
                               const OnetStudyOptions& options = {});

// Columns scale,ratio_cos,ratio_sin; spread = max/min over all ratios.
StudyReport lipschitz_study(const spectral::ProblemSpec& problem, const std::vector<double>& scales, int p = 0);

// Builds the parametric ONet and evaluates it on a parameter grid;
// columns y1..y_dp,h1_error.
StudyReport parametric_study(const onet::ParametricFamily& family, const spectral::Expr& f, double epsilon,
                             int grid_points = 21);

} // namespace pdeonet::experiments
