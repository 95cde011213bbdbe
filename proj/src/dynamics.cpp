#include "sto/dynamics.hpp"
#include "sto/errors.hpp"
#include "sto/kvfile.hpp"

#include <algorithm>
#include <cmath>

namespace sto {

void TrainParams::validate() const {
    double sum = 0;
    for (double m : vehicle_masses_kg) sum += m;
    if (std::abs(sum - static_mass_kg) > 1e-6 * static_mass_kg)
        throw ValidationError("vehicle masses sum to " + std::to_string(sum) +
                              " kg, expected static mass " + std::to_string(static_mass_kg));
    if (traction_time_constant_s < 0 || braking_time_constant_s < 0 ||
        traction_delay_s < 0 || braking_delay_s < 0)
        throw ValidationError("actuator time constants and delays must be >= 0");
    if (rotating_factor < 0) throw ValidationError("rotating factor must be >= 0");
    if (actuator_gain <= 0) throw ValidationError("actuator gain must be > 0");
    if (min_deceleration_mps2 >= 0) throw ValidationError("min deceleration must be < 0");
}

TrainParams load_train_params(const std::string& path) {
    const KvFile kv = KvFile::parse_file(path);
    const KvFile::Table& r = kv.root();
    TrainParams p;
    p.static_mass_kg = r.number("static_mass_kg");
    p.rotating_factor = r.number_or("rotating_factor", p.rotating_factor);
    const std::vector<double> masses = r.array("vehicle_masses_kg");
    if (masses.size() != p.vehicle_masses_kg.size())
        throw ValidationError(path + ": vehicle_masses_kg must list 6 masses");
    std::copy(masses.begin(), masses.end(), p.vehicle_masses_kg.begin());
    p.davis_d1 = r.number("davis_d1");
    p.davis_d2 = r.number("davis_d2");
    p.davis_d3 = r.number("davis_d3");
    p.davis_specific = r.boolean_or("davis_specific", true);
    p.osc_sin_amp_mm = r.number_or("osc_sin_amp_mm", p.osc_sin_amp_mm);
    p.osc_cos_amp_mm = r.number_or("osc_cos_amp_mm", p.osc_cos_amp_mm);
    p.traction_time_constant_s = r.number_or("traction_time_constant_s", p.traction_time_constant_s);
    p.traction_delay_s = r.number_or("traction_delay_s", p.traction_delay_s);
    p.braking_time_constant_s = r.number_or("braking_time_constant_s", p.braking_time_constant_s);
    p.braking_delay_s = r.number_or("braking_delay_s", p.braking_delay_s);
    p.actuator_gain = r.number_or("actuator_gain", p.actuator_gain);
    p.min_deceleration_mps2 = r.number_or("min_deceleration_mps2", p.min_deceleration_mps2);
    p.gravity_mps2 = r.number_or("gravity_mps2", p.gravity_mps2);
    p.validate();
    return p;
}

double gradient_force(const TrainParams& p, const LineProfile& line, double s_m) {
    return p.static_mass_kg * p.gravity_mps2 * std::sin(line.gradient_at(s_m));
}

double davis_force(const TrainParams& p, double v_mps) {
    if (!p.davis_specific)
        return p.davis_d1 + p.davis_d2 * v_mps + p.davis_d3 * v_mps * v_mps;
    const double v_kmh = 3.6 * v_mps;
    const double w = p.davis_d1 + p.davis_d2 * v_kmh + p.davis_d3 * v_kmh * v_kmh;  // N/kN
    return w * p.static_mass_kg * p.gravity_mps2 / 1000.0;
}

double curve_force(const TrainParams& p, const LineProfile& line, double s_m) {
    const std::optional<double> r = line.curve_radius_at(s_m);
    if (!r) return 0.0;
    if (*r <= 55.0)
        throw ValidationError("curve radius " + std::to_string(*r) + " m <= 55 m");
    const double w = 6.3 * (p.static_mass_kg / 1000.0) / (*r - 55.0);  // N/kN
    return w * p.static_mass_kg * p.gravity_mps2 / 1000.0;
}

double interaction_force(const TrainParams& p, double t_s) {
    // ddot(delta_l): sin couplings (1,3,6) -> -amp*sin(t), cos couplings (2,4,5) -> -amp*cos(t),
    // amplitudes in mm, converted to m.
    const int k = static_cast<int>(p.vehicle_masses_kg.size());
    double total = 0;
    for (int i = 1; i <= k - 1; ++i) {
        const bool sin_type = (i == 1 || i == 3 || i == 6);
        const double ddot = sin_type ? -p.osc_sin_amp_mm * 1e-3 * std::sin(t_s)
                                     : -p.osc_cos_amp_mm * 1e-3 * std::cos(t_s);
        double trailing = 0;
        for (int j = i + 1; j <= k; ++j) trailing += p.vehicle_masses_kg[j - 1];
        total += ddot * trailing;
    }
    return total;
}

double net_acceleration(const TrainParams& p, const LineProfile& line, double t_s, double s_m,
                        double v_mps, double output_force_n) {
    const double resist = gradient_force(p, line, s_m) + davis_force(p, v_mps) +
                          curve_force(p, line, s_m) + interaction_force(p, t_s);
    return (output_force_n - resist) / p.effective_mass_kg();
}

// ---- actuator ----

void ActuatorState::Pipeline::configure(double delay_s, double time_constant_s, double gain_,
                                        double substep_s) {
    length = static_cast<std::size_t>(std::ceil(delay_s / substep_s - 1e-12));
    gain = gain_;
    decay = time_constant_s > 0 ? std::exp(-substep_s / time_constant_s) : 0.0;
    clear();
}

void ActuatorState::Pipeline::clear() {
    queue.assign(length, 0.0);
    lag = 0;
}

double ActuatorState::Pipeline::advance(double input) {
    double delayed = input;
    if (length > 0) {
        queue.push_back(input);
        delayed = queue.front();
        queue.pop_front();
    }
    lag = decay * lag + (1.0 - decay) * gain * delayed;
    return lag;
}

ActuatorState::ActuatorState(const TrainParams& p, double substep_s) {
    if (substep_s <= 0) throw ValidationError("substep must be > 0");
    traction_.configure(p.traction_delay_s, p.traction_time_constant_s, p.actuator_gain, substep_s);
    braking_.configure(p.braking_delay_s, p.braking_time_constant_s, p.actuator_gain, substep_s);
}

double ActuatorState::step(double commanded_mps2) {
    traction_.advance(commanded_mps2 >= 0 ? commanded_mps2 : 0.0);
    braking_.advance(commanded_mps2 < 0 ? commanded_mps2 : 0.0);
    return realized();
}

void ActuatorState::reset() {
    traction_.clear();
    braking_.clear();
}

// ---- integration ----

StepOutcome integrate_control_step(const TrainState& state, ActuatorState& actuator,
                                   const TrainParams& params, const LineProfile& line,
                                   double commanded_u, double dt_s, double substep_s,
                                   std::optional<double> stop_at_m) {
    const long n = std::lround(dt_s / substep_s);
    if (n < 1 || std::abs(n * substep_s - dt_s) > 1e-9)
        throw ValidationError("dt must be a positive integer multiple of the substep");

    const double v_start = state.v_mps;
    const double u_start = state.u_actual;
    double t = state.t_s, s = state.s_m, v = state.v_mps, u_act = state.u_actual;
    bool crossed = false, overshoot = false;

    for (long i = 0; i < n; ++i) {
        u_act = actuator.step(commanded_u);
        const double force_out = params.effective_mass_kg() * u_act;
        const double a = net_acceleration(params, line, t, s, v, force_out);
        const double v_old = v;
        v = std::max(0.0, v + a * substep_s);
        const double s_old = s;
        const double s_raw = s + 0.5 * (v_old + v) * substep_s;
        s = std::min(s_raw, line.total_length_m());
        t = state.t_s + (i + 1) * substep_s;

        if (stop_at_m && s_raw >= *stop_at_m) {
            crossed = true;
            overshoot = s_raw > *stop_at_m;
            const double gained = s_raw - s_old;
            const double f = gained > 0 ? (*stop_at_m - s_old) / gained : 1.0;
            t = state.t_s + (i + f) * substep_s;
            v = v_old + f * (v - v_old);
            s = *stop_at_m;
            break;
        }
    }
    if (!crossed) t = state.t_s + dt_s;  // keep control-step times on the exact grid

    StepOutcome out;
    out.state = TrainState{t, s, v, u_act, commanded_u};
    // Energy per mass of this control step, the discrete left-endpoint summand:
    // realized acceleration times velocity at the step start times the nominal dt.
    out.delta_Ie = std::abs(u_act) * v_start * dt_s;
    out.jerk = std::abs(u_act - u_start) / dt_s;
    out.crossed = crossed;
    out.overshoot = overshoot;
    return out;
}

} // namespace sto
