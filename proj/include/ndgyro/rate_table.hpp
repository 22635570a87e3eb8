#pragma once

// Rate-table kinematics. A JOG sets a new rate setpoint; the rate then ramps
// linearly toward it at the configured acceleration. Rates are deg/s,
// clockwise positive; times in seconds; angles in degrees.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace ndgyro {

struct TableLimits {
  double max_rate_dps = 400.0;
};

struct TableState {
  double t = 0.0;
  double angle = 0.0;
  double rate = 0.0;
  double rate_setpoint = 0.0;
  double accel = 1.0;  // ramp magnitude, deg/s^2
};

struct Instruction {
  double duration = 0.0;       // s
  double rate_setpoint = 0.0;  // deg/s
  double accel = 1.0;          // deg/s^2
};

using RotationProfile = std::vector<Instruction>;

inline void validate_profile(const RotationProfile& profile, const TableLimits& limits = {}) {
  for (const auto& ins : profile) {
    if (!(ins.duration > 0.0)) throw std::invalid_argument("RotationProfile: durations must be positive");
    if (!(ins.accel > 0.0)) throw std::invalid_argument("RotationProfile: accelerations must be positive");
    if (std::abs(ins.rate_setpoint) > limits.max_rate_dps)
      throw std::invalid_argument("RotationProfile: setpoint exceeds the table rate limit");
  }
}

inline TableState jog(TableState state, double new_setpoint, const TableLimits& limits = {}) {
  if (std::abs(new_setpoint) > limits.max_rate_dps)
    throw std::invalid_argument("jog: setpoint exceeds the table rate limit");
  state.rate_setpoint = new_setpoint;
  return state;
}

/// Advances by dt. The rate moves toward the setpoint by at most accel*dt
/// and stops exactly on it; the angle is the exact integral of the
/// resulting piecewise-linear rate.
inline TableState step(TableState s, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (!(s.accel > 0.0)) throw std::invalid_argument("step: accel must be positive");
  const double gap = s.rate_setpoint - s.rate;
  const double reach = s.accel * dt;
  if (std::abs(gap) <= reach) {
    const double t_ramp = std::abs(gap) / s.accel;
    s.angle += 0.5 * (s.rate + s.rate_setpoint) * t_ramp + s.rate_setpoint * (dt - t_ramp);
    s.rate = s.rate_setpoint;
  } else {
    double next = s.rate + std::copysign(reach, gap);
    if ((gap > 0.0) == (next > s.rate_setpoint)) next = s.rate_setpoint;  // rounding guard
    s.angle += 0.5 * (s.rate + next) * dt;
    s.rate = next;
  }
  s.t += dt;
  return s;
}

/// Piecewise-linear rate history of a profile, evaluable at any time.
class MotionTrace {
 public:
  struct Segment {
    double t0;
    double duration;
    double rate0;  // deg/s at t0
    double slope;  // deg/s^2 over the segment
    double angle0;
  };

  MotionTrace(const RotationProfile& profile, const TableState& initial = {}, const TableLimits& limits = {}) {
    validate_profile(profile, limits);
    double t = initial.t;
    double rate = initial.rate;
    double angle = initial.angle;
    t_start_ = t;
    auto push = [&](double duration, double slope) {
      if (duration <= 0.0) return;
      segments_.push_back({t, duration, rate, slope, angle});
      angle += rate * duration + 0.5 * slope * duration * duration;
      rate += slope * duration;
      t += duration;
    };
    for (const auto& ins : profile) {
      const double gap = ins.rate_setpoint - rate;
      const double t_ramp = std::min(std::abs(gap) / ins.accel, ins.duration);
      const double end = t + ins.duration;
      push(t_ramp, std::copysign(ins.accel, gap));
      if (t_ramp * ins.accel >= std::abs(gap)) rate = ins.rate_setpoint;
      push(end - t, 0.0);
      t = end;
    }
    t_end_ = t;
    final_rate_ = rate;
    final_angle_ = angle;
  }

  double start() const { return t_start_; }
  double end() const { return t_end_; }
  const std::vector<Segment>& segments() const { return segments_; }

  double rate(double t) const {
    const Segment* s = find(t);
    if (s == nullptr) return t < t_start_ ? initial_rate() : final_rate_;
    return s->rate0 + s->slope * (t - s->t0);
  }

  double angle(double t) const {
    const Segment* s = find(t);
    if (s == nullptr) {
      if (t < t_start_) return segments_.empty() ? final_angle_ : segments_.front().angle0;
      return final_angle_ + final_rate_ * (t - t_end_);
    }
    const double dt = t - s->t0;
    return s->angle0 + s->rate0 * dt + 0.5 * s->slope * dt * dt;
  }

  /// Instantaneous angular acceleration (0 while holding).
  double accel(double t) const {
    const Segment* s = find(t);
    return s == nullptr ? 0.0 : s->slope;
  }

 private:
  double initial_rate() const { return segments_.empty() ? final_rate_ : segments_.front().rate0; }

  const Segment* find(double t) const {
    if (segments_.empty() || t < t_start_ || t >= t_end_) {
      if (!segments_.empty() && t == t_end_) return &segments_.back();
      return nullptr;
    }
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const Segment& seg) { return v < seg.t0; });
    return &*std::prev(it);
  }

  std::vector<Segment> segments_;
  double t_start_ = 0.0;
  double t_end_ = 0.0;
  double final_rate_ = 0.0;
  double final_angle_ = 0.0;
};

struct TelemetrySample {
  double t;
  double angle;  // deg
  double rate;   // deg/s
  double accel;  // deg/s^2
};

struct TelemetryOptions {
  double poll = 30e-3;
  double jitter = 0.0;     // uniform timestamp jitter half-width, s (< poll/2)
  double servo_lag = 0.0;  // first-order lag time constant, s; 0 = perfect servo
};

namespace detail {

// Rate and angle of a first-order lag driven by a piecewise-linear command,
// advanced in closed form across segment boundaries. Queries must be sorted.
class LagFollower {
 public:
  LagFollower(const MotionTrace& trace, double lag)
      : trace_(trace), lag_(lag), t_(trace.start()), rate_(trace.rate(trace.start())), angle_(trace.angle(trace.start())) {}

  void advance_to(double t_target) {
    while (t_ < t_target) {
      double seg_end = t_target;
      for (const auto& s : trace_.segments()) {
        const double e = s.t0 + s.duration;
        if (e > t_ && e < seg_end) {
          seg_end = e;
          break;
        }
      }
      const double dt = seg_end - t_;
      const double r0 = trace_.rate(t_);
      const double slope = trace_.accel(t_);
      // dr/dt = (r0 + slope*s - r)/lag
      const double offset = rate_ - r0 + slope * lag_;
      const double decay = std::exp(-dt / lag_);
      const double new_rate = r0 + slope * dt - slope * lag_ + offset * decay;
      angle_ += r0 * dt + 0.5 * slope * dt * dt - slope * lag_ * dt + offset * lag_ * (1.0 - decay);
      rate_ = new_rate;
      t_ = seg_end;
    }
  }

  double rate() const { return rate_; }
  double angle() const { return angle_; }
  double accel() const { return (trace_.rate(t_) - rate_) / lag_; }

 private:
  const MotionTrace& trace_;
  double lag_;
  double t_;
  double rate_;
  double angle_;
};

}  // namespace detail

/// Polls the table every opts.poll seconds over the whole profile.
template <class Rng = std::mt19937_64>
std::vector<TelemetrySample> run_profile(const MotionTrace& trace, const TelemetryOptions& opts = {},
                                         Rng* rng = nullptr) {
  if (!(opts.poll > 0.0)) throw std::invalid_argument("run_profile: poll interval must be positive");
  if (!(opts.jitter >= 0.0 && opts.jitter < 0.5 * opts.poll))
    throw std::invalid_argument("run_profile: jitter must lie in [0, poll/2)");
  std::vector<TelemetrySample> out;
  const auto n = static_cast<std::size_t>(std::floor((trace.end() - trace.start()) / opts.poll + 1e-9)) + 1;
  out.reserve(n);
  std::uniform_real_distribution<double> jit(-opts.jitter, opts.jitter);
  detail::LagFollower lag(trace, opts.servo_lag > 0.0 ? opts.servo_lag : 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    double t = trace.start() + static_cast<double>(k) * opts.poll;
    if (rng != nullptr && opts.jitter > 0.0 && k > 0) t += jit(*rng);
    if (opts.servo_lag > 0.0) {
      lag.advance_to(t);
      out.push_back({t, lag.angle(), lag.rate(), lag.accel()});
    } else {
      out.push_back({t, trace.angle(t), trace.rate(t), trace.accel(t)});
    }
  }
  return out;
}

template <class Rng = std::mt19937_64>
std::vector<TelemetrySample> run_profile(const RotationProfile& profile, const TelemetryOptions& opts = {},
                                         Rng* rng = nullptr) {
  return run_profile(MotionTrace(profile), opts, rng);
}

/// Repeated sweeps between -amplitude and +amplitude at the given
/// acceleration, starting and ending at rest.
inline RotationProfile triangle_sweep(double amplitude_dps, double accel_dps2, int cycles) {
  if (!(amplitude_dps > 0.0 && accel_dps2 > 0.0 && cycles > 0))
    throw std::invalid_argument("triangle_sweep: amplitude, accel and cycles must be positive");
  const double leg = amplitude_dps / accel_dps2;
  RotationProfile p;
  p.push_back({leg, amplitude_dps, accel_dps2});
  for (int i = 0; i < cycles; ++i) {
    p.push_back({2.0 * leg, -amplitude_dps, accel_dps2});
    p.push_back({2.0 * leg, amplitude_dps, accel_dps2});
  }
  p.push_back({leg, 0.0, accel_dps2});
  return p;
}

/// Rate program whose rate-versus-time trace draws the letters "NV".
inline RotationProfile nv_trace_profile(double height_dps = 100.0, double accel_dps2 = 20.0) {
  const double ramp = height_dps / accel_dps2;
  const double hold = 2.0;
  const double gentle = accel_dps2 / 4.0;
  RotationProfile p;
  p.push_back({hold, 0.0, accel_dps2});
  // N: up stroke, diagonal down, up stroke.
  p.push_back({ramp, height_dps, accel_dps2});
  p.push_back({4.0 * ramp, 0.0, gentle});
  p.push_back({ramp, height_dps, accel_dps2});
  p.push_back({ramp, 0.0, accel_dps2});
  p.push_back({2.0 * hold, 0.0, accel_dps2});
  // V: ramp up, then descend and ascend at the gentle slope.
  p.push_back({ramp, height_dps, accel_dps2});
  p.push_back({4.0 * ramp, 0.0, gentle});
  p.push_back({4.0 * ramp, height_dps, gentle});
  p.push_back({ramp, 0.0, accel_dps2});
  p.push_back({hold, 0.0, accel_dps2});
  return p;
}

}  // namespace ndgyro
