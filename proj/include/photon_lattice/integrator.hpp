#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "photon_lattice/model.hpp"

namespace photon_lattice {

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double initial_step = 1e-3;
    double max_step = 0.1;
    double sample_interval = 0.1;
    double t_end = 0.0;
    /// Grid points before this time are skipped (long transients).
    double record_from = 0.0;
    /// Also store every site at every sample, not only the last one.
    bool record_full_field = false;

    void validate() const;
};

/// Samples of the output site on the uniform grid t_k = k * sample_interval.
struct Trajectory {
    std::vector<double> sample_times;
    std::vector<Complex> alpha_last;
    std::vector<Field> full_field;
    ChainParams params;
    std::string ic_descriptor;
    FieldState final_state;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

enum class IntegrationErrorKind { StepUnderflow, NonFinite };

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(IntegrationErrorKind kind, double last_good_time, const std::string& what)
        : std::runtime_error(what), kind_(kind), last_good_time_(last_good_time) {}

    IntegrationErrorKind kind() const noexcept { return kind_; }
    double last_good_time() const noexcept { return last_good_time_; }

private:
    IntegrationErrorKind kind_;
    double last_good_time_;
};

inline constexpr double kMinStep = 1e-14;

struct StepResult {
    FieldState state;      // advanced state when accepted, input state otherwise
    double error = 0.0;    // scaled embedded error norm; <= 1 means accepted
    double h_next = 0.0;   // < h on rejection
    bool accepted = false;
};

/// Called after every accepted step with both endpoints and their derivatives.
using StepObserver = std::function<void(const FieldState& prev, const Field& prev_deriv, const FieldState& next,
                                        const Field& next_deriv)>;

/// Dormand-Prince 5(4) embedded pair with FSAL and proportional-integral
/// step-size control. Holds the controller memory between attempts, so one
/// instance integrates one trajectory; separate instances are independent.
class DormandPrince {
public:
    DormandPrince(const ChainParams& params, const IntegratorConfig& cfg);

    /// One attempt of size h from `state`. `deriv` must be rhs(state).
    /// On acceptance `next_deriv` receives rhs of the new state.
    StepResult attempt(const FieldState& state, const Field& deriv, double h, Field& next_deriv);

    const ChainParams& params() const { return params_; }

private:
    ChainParams params_;
    IntegratorConfig cfg_;
    std::vector<Field> k_;
    Field stage_;
    double err_prev_ = 1e-4;
    bool last_rejected_ = false;
};

/// Single step from a fresh controller.
StepResult step(const ChainParams& params, const FieldState& state, double h, const IntegratorConfig& cfg);

/// Integrates from ic.time to cfg.t_end. Samples are taken at every grid
/// point k * sample_interval inside [ic.time, t_end] by cubic Hermite
/// interpolation between accepted steps.
Trajectory integrate(const ChainParams& params, const FieldState& ic, const IntegratorConfig& cfg,
                     std::string ic_descriptor = "zero", const StepObserver& observer = {});

}  // namespace photon_lattice
