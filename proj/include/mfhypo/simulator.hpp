#pragma once

// Replica ensembles of the N-particle kinetic Langevin system
//   dx_i = v_i dt
//   dv_i = (-v_i - grad U(x_i) - 1/N sum_j grad W(x_i - x_j)) dt + sqrt(2) dB_i
// with observable time series, decay-rate fits and N sweeps.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mfhypo/core.hpp"
#include "mfhypo/meanfield.hpp"
#include "mfhypo/potentials.hpp"

namespace mfhypo {

enum class Scheme { EulerMaruyama, SplittingBAOAB };

inline const char* to_string(Scheme s) { return s == Scheme::EulerMaruyama ? "EulerMaruyama" : "BAOAB"; }

struct IntegratorConfig {
  Scheme scheme = Scheme::SplittingBAOAB;
  double dt = 0.01;
  bool inject_noise = true;  // false only for deterministic debugging
};

inline constexpr double kMaxDt = 0.1;
inline constexpr double kMaxSteps = 1e8;

inline void validate(const IntegratorConfig& ic) {
  if (!(ic.dt > 0.0) || !std::isfinite(ic.dt)) throw InvalidInput("integrator: dt must be > 0");
  if (ic.dt > kMaxDt) throw InvalidInput("integrator: dt must be <= 0.1");
}

struct InitSpec {
  double offset = 2.0;  // mean shift of the first position coordinate
  double position_std = 1.0;
  double velocity_std = 1.0;
};

struct EnsembleState {
  int replicas = 0;
  int N = 0;
  int d = 0;
  std::vector<double> positions;   // [replica][particle][component]
  std::vector<double> velocities;  // same shape
  std::vector<int> labels;         // noise-stream label of each particle slot
  double time = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t step_count = 0;

  std::size_t replica_size() const { return static_cast<std::size_t>(N) * d; }
  std::span<double> x(int r) { return {positions.data() + r * replica_size(), replica_size()}; }
  std::span<double> v(int r) { return {velocities.data() + r * replica_size(), replica_size()}; }
  std::span<const double> x(int r) const { return {positions.data() + r * replica_size(), replica_size()}; }
  std::span<const double> v(int r) const { return {velocities.data() + r * replica_size(), replica_size()}; }
};

namespace detail {
inline constexpr std::uint64_t kInitPositionStep = 0x8000000000000000ULL;
inline constexpr std::uint64_t kInitVelocityStep = 0x8000000000000001ULL;

// Particle slots ordered by label; pair sums and reductions follow this order.
inline std::vector<int> label_order(const std::vector<int>& labels) {
  std::vector<int> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return labels[a] < labels[b]; });
  return order;
}
}  // namespace detail

inline EnsembleState initialize(const ModelConfig& m, int replicas, const InitSpec& init, std::uint64_t seed) {
  validate(m);
  if (replicas < 1) throw InvalidInput("ensemble: replicas must be >= 1");
  EnsembleState s;
  s.replicas = replicas;
  s.N = m.N;
  s.d = m.d;
  s.master_seed = seed;
  s.labels.resize(static_cast<std::size_t>(m.N));
  std::iota(s.labels.begin(), s.labels.end(), 0);
  s.positions.resize(static_cast<std::size_t>(replicas) * s.replica_size());
  s.velocities.resize(s.positions.size());
  for (int r = 0; r < replicas; ++r) {
    for (int i = 0; i < m.N; ++i) {
      for (int k = 0; k < m.d; ++k) {
        const auto idx = static_cast<std::size_t>(r) * s.replica_size() + static_cast<std::size_t>(i * m.d + k);
        const StreamKey kx{seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(k), detail::kInitPositionStep};
        StreamKey kv = kx;
        kv.step = detail::kInitVelocityStep;
        s.positions[idx] = (k == 0 ? init.offset : 0.0) + init.position_std * counter_normal(kx);
        s.velocities[idx] = init.velocity_std * counter_normal(kv);
      }
    }
  }
  return s;
}

// Advances one replica by `steps` steps. `force` holds -grad V at the current
// positions on entry and exit.
class ReplicaStepper {
 public:
  ReplicaStepper(const ModelConfig& m, const IntegratorConfig& ic, const EnsembleState& s)
      : model_(m), ic_(ic), order_(detail::label_order(s.labels)), labels_(s.labels), seed_(s.master_seed) {
    force_.resize(s.replica_size());
  }

  void prime(std::span<const double> x) { force_into(model_, x, force_, order_); }

  void step(int replica, std::span<double> x, std::span<double> v, std::uint64_t step_index) {
    const double dt = ic_.dt;
    const auto n = x.size();
    const auto d = static_cast<std::size_t>(model_.d);
    if (replica != prefix_replica_) {
      prefixes_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        prefixes_[i] = stream_prefix(seed_, static_cast<std::uint64_t>(replica),
                                     static_cast<std::uint64_t>(labels_[i / d]), static_cast<std::uint64_t>(i % d));
      }
      prefix_replica_ = replica;
    }
    auto noise = [&](std::size_t idx) { return ic_.inject_noise ? counter_normal(prefixes_[idx], step_index) : 0.0; };
    if (ic_.scheme == Scheme::EulerMaruyama) {
      const double amp = std::sqrt(2.0 * dt);
      for (std::size_t i = 0; i < n; ++i) {
        const double x_old = x[i], v_old = v[i];
        x[i] = x_old + v_old * dt;
        v[i] = v_old + (-v_old + force_[i]) * dt + amp * noise(i);
      }
      force_into(model_, x, force_, order_);
    } else {
      const double decay = std::exp(-dt);
      const double amp = std::sqrt(-std::expm1(-2.0 * dt));
      for (std::size_t i = 0; i < n; ++i) {
        v[i] += 0.5 * dt * force_[i];
        x[i] += 0.5 * dt * v[i];
        v[i] = decay * v[i] + amp * noise(i);
        x[i] += 0.5 * dt * v[i];
      }
      force_into(model_, x, force_, order_);
      for (std::size_t i = 0; i < n; ++i) v[i] += 0.5 * dt * force_[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(v[i])) {
        std::ostringstream msg;
        msg << "non-finite state at replica " << replica << ", step " << step_index << ", slot " << i / d;
        throw std::runtime_error(msg.str());
      }
    }
  }

  const std::vector<int>& order() const { return order_; }

 private:
  const ModelConfig& model_;
  IntegratorConfig ic_;
  std::vector<int> order_;
  std::vector<int> labels_;
  std::uint64_t seed_;
  std::vector<double> force_;
  std::vector<std::uint64_t> prefixes_;
  int prefix_replica_ = -1;
};

// One step of every replica.
inline void step(EnsembleState& s, const ModelConfig& m, const IntegratorConfig& ic) {
  validate(ic);
  ReplicaStepper stepper(m, ic, s);
  for (int r = 0; r < s.replicas; ++r) {
    stepper.prime(s.x(r));
    stepper.step(r, s.x(r), s.v(r), s.step_count);
  }
  s.step_count += 1;
  s.time += ic.dt;
}

// Exact Ornstein-Uhlenbeck velocity update (friction 1, unit stationary variance).
inline void ornstein_uhlenbeck_update(EnsembleState& s, double dt) {
  const double decay = std::exp(-dt);
  const double amp = std::sqrt(-std::expm1(-2.0 * dt));
  const auto d = static_cast<std::size_t>(s.d);
  for (int r = 0; r < s.replicas; ++r) {
    auto v = s.v(r);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = decay * v[i] + amp * counter_normal({s.master_seed, static_cast<std::uint64_t>(r),
                                                  static_cast<std::uint64_t>(s.labels[i / d]),
                                                  static_cast<std::uint64_t>(i % d), s.step_count});
    }
  }
  s.step_count += 1;
}

// ---------------------------------------------------------------------------
// Observables: per-replica scalars, reduced over particles in label order.

enum class Observable { MeanPosition, MeanVelocity, KineticEnergy, ConfinementEnergy, PairDistanceSecondMoment };

inline const char* to_string(Observable o) {
  switch (o) {
    case Observable::MeanPosition: return "mean_position";
    case Observable::MeanVelocity: return "mean_velocity";
    case Observable::KineticEnergy: return "kinetic_energy";
    case Observable::ConfinementEnergy: return "confinement_energy";
    case Observable::PairDistanceSecondMoment: return "pair_distance_second_moment";
  }
  return "unknown";
}

inline std::optional<Observable> observable_from_string(const std::string& s) {
  for (Observable o : {Observable::MeanPosition, Observable::MeanVelocity, Observable::KineticEnergy,
                       Observable::ConfinementEnergy, Observable::PairDistanceSecondMoment}) {
    if (s == to_string(o)) return o;
  }
  return std::nullopt;
}

// Per-particle averages; positions/velocities use the first coordinate, the
// pair moment is (1/(N(N-1))) sum_{i != j} |x_i - x_j|^2.
inline double observe(Observable o, const ModelConfig& m, std::span<const double> x, std::span<const double> v,
                      std::span<const int> order) {
  const auto d = static_cast<std::size_t>(m.d);
  const auto n = static_cast<std::size_t>(m.N);
  double acc = 0.0;
  switch (o) {
    case Observable::MeanPosition:
      for (int i : order) acc += x[static_cast<std::size_t>(i) * d];
      return acc / static_cast<double>(n);
    case Observable::MeanVelocity:
      for (int i : order) acc += v[static_cast<std::size_t>(i) * d];
      return acc / static_cast<double>(n);
    case Observable::KineticEnergy:
      for (int i : order) {
        for (std::size_t k = 0; k < d; ++k) acc += 0.5 * v[i * d + k] * v[i * d + k];
      }
      return acc / static_cast<double>(n);
    case Observable::ConfinementEnergy:
      for (int i : order) acc += value(m.U, x.subspan(static_cast<std::size_t>(i) * d, d));
      return acc / static_cast<double>(n);
    case Observable::PairDistanceSecondMoment:
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          const auto i = static_cast<std::size_t>(order[a]), j = static_cast<std::size_t>(order[b]);
          for (std::size_t k = 0; k < d; ++k) {
            const double df = x[i * d + k] - x[j * d + k];
            acc += 2.0 * df * df;
          }
        }
      }
      return acc / static_cast<double>(n * (n - 1));
  }
  return 0.0;
}

inline double observe(Observable o, const ModelConfig& m, std::span<const double> x, std::span<const double> v) {
  std::vector<int> order(static_cast<std::size_t>(m.N));
  std::iota(order.begin(), order.end(), 0);
  return observe(o, m, x, v, order);
}

struct ObservableSeries {
  Observable id = Observable::MeanPosition;
  std::vector<double> mean;
  std::vector<double> variance;         // across replicas
  std::vector<double> per_replica;      // [time][replica], kept on request
};

struct TimeSeries {
  std::vector<double> times;
  int replicas = 0;
  std::vector<ObservableSeries> observables;

  const ObservableSeries& get(Observable o) const {
    for (const auto& s : observables) {
      if (s.id == o) return s;
    }
    throw InvalidInput(std::string("observable not recorded: ") + to_string(o));
  }
};

struct RunOptions {
  int threads = 1;
  bool keep_per_replica = false;
};

struct RunResult {
  TimeSeries series;
  EnsembleState final_state;
};

inline RunResult run(const ModelConfig& m, const IntegratorConfig& ic, int replicas, double horizon,
                     const InitSpec& init, const std::vector<Observable>& observables, int stride,
                     std::uint64_t seed, const RunOptions& opt = {}) {
  validate(m);
  validate(ic);
  if (replicas < 1) throw InvalidInput("run: replicas must be >= 1");
  if (observables.empty()) throw InvalidInput("run: observable list is empty");
  if (stride < 1) throw InvalidInput("run: stride must be >= 1");
  if (!(horizon >= 0.0)) throw InvalidInput("run: horizon must be >= 0");
  const double steps_f = std::round(horizon / ic.dt);
  if (steps_f > kMaxSteps) throw ResourceCap("run: horizon/dt exceeds 1e8 steps");
  const auto steps = static_cast<std::uint64_t>(steps_f);
  const std::size_t n_records = static_cast<std::size_t>(steps / static_cast<std::uint64_t>(stride)) + 1;

  EnsembleState state = initialize(m, replicas, init, seed);
  const auto R = static_cast<std::size_t>(replicas);
  const std::size_t n_obs = observables.size();
  std::vector<double> table(n_obs * n_records * R);  // [obs][time][replica]

  auto work = [&](int first, int stride_r) {
    ReplicaStepper stepper(m, ic, state);
    for (int r = first; r < replicas; r += stride_r) {
      auto x = state.x(r);
      auto v = state.v(r);
      stepper.prime(x);
      std::size_t rec = 0;
      for (std::uint64_t s = 0;; ++s) {
        if (s % static_cast<std::uint64_t>(stride) == 0) {
          for (std::size_t o = 0; o < n_obs; ++o) {
            table[(o * n_records + rec) * R + static_cast<std::size_t>(r)] =
                observe(observables[o], m, x, v, stepper.order());
          }
          ++rec;
        }
        if (s == steps) break;
        stepper.step(r, x, v, s);
      }
    }
  };
  const int threads = std::max(1, std::min(opt.threads, replicas));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  state.step_count = steps;
  state.time = static_cast<double>(steps) * ic.dt;

  RunResult out;
  out.series.replicas = replicas;
  for (std::size_t k = 0; k < n_records; ++k) {
    out.series.times.push_back(static_cast<double>(k * static_cast<std::size_t>(stride)) * ic.dt);
  }
  for (std::size_t o = 0; o < n_obs; ++o) {
    ObservableSeries os;
    os.id = observables[o];
    for (std::size_t k = 0; k < n_records; ++k) {
      const double* row = &table[(o * n_records + k) * R];
      double mean = 0.0;
      for (std::size_t r = 0; r < R; ++r) mean += row[r];
      mean /= static_cast<double>(R);
      double var = 0.0;
      for (std::size_t r = 0; r < R; ++r) var += (row[r] - mean) * (row[r] - mean);
      var = R > 1 ? var / static_cast<double>(R - 1) : 0.0;
      os.mean.push_back(mean);
      os.variance.push_back(var);
    }
    if (opt.keep_per_replica) {
      os.per_replica.assign(table.begin() + static_cast<long>(o * n_records * R),
                            table.begin() + static_cast<long>((o + 1) * n_records * R));
    }
    out.series.observables.push_back(std::move(os));
  }
  out.final_state = std::move(state);
  return out;
}

// ---------------------------------------------------------------------------
// Exponential decay fits of an ensemble-mean series.

enum class DecayModel { LogLinear, DampedOscillation };

struct DecayFit {
  double lambda_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double r_squared = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double omega = 0.0;  // damped-oscillation frequency, 0 for log-linear
  DecayModel model = DecayModel::LogLinear;
  Observable observable = Observable::MeanPosition;
};

struct DecayFitOutcome {
  std::optional<DecayFit> fit;
  std::string diagnostic;
};

struct FitOptions {
  int bootstrap = 200;
  std::uint64_t seed = 0xb0075;
  std::size_t min_points = 20;
};

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit least_squares_line(std::span<const double> t, std::span<const double> y) {
  const double n = static_cast<double>(t.size());
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sty / stt;
  f.intercept = my - f.slope * mt;
  double ssr = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * t[i]);
    ssr += e * e;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

// Residual sum of squares of e^{-lambda t}(A cos w t + B sin w t) with the
// amplitudes solved by linear least squares; also returns R^2.
inline std::pair<double, double> damped_residual(std::span<const double> t, std::span<const double> y, double lambda,
                                                 double omega) {
  double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0, syy = 0, my = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = std::exp(-lambda * (t[i] - t[0]));
    const double c = e * std::cos(omega * t[i]), s = e * std::sin(omega * t[i]);
    s11 += c * c;
    s12 += c * s;
    s22 += s * s;
    b1 += c * y[i];
    b2 += s * y[i];
    my += y[i];
  }
  my /= static_cast<double>(t.size());
  for (double v : y) syy += (v - my) * (v - my);
  double A = 0, B = 0;
  const double det = s11 * s22 - s12 * s12;
  if (std::abs(det) > 1e-14 * (s11 * s22 + 1e-300)) {
    A = (b1 * s22 - b2 * s12) / det;
    B = (s11 * b2 - s12 * b1) / det;
  } else if (s11 > 0) {
    A = b1 / s11;
  }
  double ssr = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = std::exp(-lambda * (t[i] - t[0]));
    const double model = e * (A * std::cos(omega * t[i]) + B * std::sin(omega * t[i]));
    ssr += (y[i] - model) * (y[i] - model);
  }
  return {ssr, syy > 0 ? 1.0 - ssr / syy : 1.0};
}

struct WindowFit {
  double lambda = 0.0;
  double omega = 0.0;
  double r_squared = 0.0;
};

inline WindowFit fit_window(std::span<const double> t, std::span<const double> s, DecayModel model,
                            std::optional<WindowFit> guess = std::nullopt) {
  if (model == DecayModel::LogLinear) {
    std::vector<double> tt, ly;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (s[i] != 0.0) {
        tt.push_back(t[i]);
        ly.push_back(std::log(std::abs(s[i])));
      }
    }
    const LineFit lf = least_squares_line(tt, ly);
    return {-lf.slope, 0.0, lf.r_squared};
  }
  WindowFit start;
  if (guess) {
    start = *guess;
  } else {
    // envelope slope and zero-crossing spacing
    std::vector<double> env(s.size());
    double run_max = 0.0;
    for (std::size_t i = s.size(); i-- > 0;) env[i] = run_max = std::max(run_max, std::abs(s[i]));
    std::vector<double> le(env.size());
    for (std::size_t i = 0; i < env.size(); ++i) le[i] = std::log(std::max(env[i], 1e-300));
    start.lambda = std::max(-least_squares_line(t, le).slope, 1e-3);
    std::vector<double> crossings;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if ((s[i - 1] < 0) != (s[i] < 0)) crossings.push_back(t[i]);
    }
    const double spacing =
        crossings.size() >= 2 ? (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1)
                              : 2.0 * (t.back() - t.front());
    start.omega = std::numbers::pi / spacing;
  }
  auto objective = [&](std::span<const double> p) { return -damped_residual(t, s, p[0], std::abs(p[1])).first; };
  const auto res = numeric::nelder_mead_max(objective, {start.lambda, start.omega},
                                            {0.1 * std::max(start.lambda, 1e-2), 0.1 * std::max(start.omega, 1e-2)},
                                            1e-14, 4000);
  WindowFit out{res.arg[0], std::abs(res.arg[1]), 0.0};
  out.r_squared = damped_residual(t, s, out.lambda, out.omega).second;
  return out;
}

}  // namespace detail

inline DecayFitOutcome fit_decay(const std::vector<double>& times, const ObservableSeries& series, int replicas,
                                 double equilibrium_value, const FitOptions& opt = {}) {
  DecayFitOutcome out;
  const std::size_t n = times.size();
  if (series.mean.size() != n) throw InvalidInput("fit_decay: series length mismatch");
  std::vector<double> signal(n), floor(n), env(n);
  for (std::size_t k = 0; k < n; ++k) {
    signal[k] = series.mean[k] - equilibrium_value;
    const double var = series.variance.empty() ? 0.0 : series.variance[k];
    floor[k] = std::sqrt(std::max(var, 0.0) / static_cast<double>(std::max(replicas, 1)));
  }
  double run_max = 0.0;
  for (std::size_t k = n; k-- > 0;) env[k] = run_max = std::max(run_max, std::abs(signal[k]));

  if (n == 0 || std::abs(signal[0]) <= 3.0 * floor[0] || signal[0] == 0.0) {
    out.diagnostic = "signal below noise floor from the start";
    return out;
  }
  std::size_t start = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (env[k] <= 0.5 * std::abs(signal[0])) {
      start = k;
      break;
    }
  }
  if (start == n) {
    out.diagnostic = "signal never decays below 50% of the initial gap";
    return out;
  }
  std::size_t end = n;
  for (std::size_t k = start; k < n; ++k) {
    if (env[k] < 3.0 * floor[k] || env[k] == 0.0) {
      end = k;
      break;
    }
  }
  if (end - start < opt.min_points) {
    out.diagnostic = "fewer than " + std::to_string(opt.min_points) + " points in the fit window";
    return out;
  }
  const std::span<const double> tw(times.data() + start, end - start);
  auto window_of = [&](const std::vector<double>& sig) {
    return std::vector<double>(sig.begin() + static_cast<long>(start), sig.begin() + static_cast<long>(end));
  };
  const std::vector<double> sw = window_of(signal);
  bool sign_change = false;
  for (std::size_t i = 1; i < sw.size(); ++i) {
    if ((sw[i - 1] < 0) != (sw[i] < 0)) sign_change = true;
  }
  const DecayModel model = sign_change ? DecayModel::DampedOscillation : DecayModel::LogLinear;
  const detail::WindowFit best = detail::fit_window(tw, sw, model);

  DecayFit fit;
  fit.lambda_hat = best.lambda;
  fit.omega = best.omega;
  fit.r_squared = best.r_squared;
  fit.t_start = times[start];
  fit.t_end = times[end - 1];
  fit.model = model;
  fit.observable = series.id;

  // Bootstrap over replicas (parametric on the mean when per-replica data is absent).
  std::vector<double> boot;
  const auto R = static_cast<std::size_t>(std::max(replicas, 1));
  const bool have_replicas = series.per_replica.size() == n * R && R > 1;
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> pick(R);
  for (int b = 0; b < opt.bootstrap; ++b) {
    std::vector<double> sig(sw.size());
    if (have_replicas) {
      std::uniform_int_distribution<std::size_t> u(0, R - 1);
      for (auto& p : pick) p = u(rng);
      for (std::size_t i = 0; i < sw.size(); ++i) {
        const double* row = &series.per_replica[(start + i) * R];
        double acc = 0.0;
        for (std::size_t p : pick) acc += row[p];
        sig[i] = acc / static_cast<double>(R) - equilibrium_value;
      }
    } else {
      std::normal_distribution<double> nd;
      for (std::size_t i = 0; i < sw.size(); ++i) sig[i] = sw[i] + floor[start + i] * nd(rng);
    }
    boot.push_back(detail::fit_window(tw, sig, model, model == DecayModel::DampedOscillation
                                                          ? std::optional<detail::WindowFit>(best)
                                                          : std::nullopt)
                       .lambda);
  }
  if (!boot.empty()) {
    std::sort(boot.begin(), boot.end());
    auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(boot.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, boot.size() - 1);
      return boot[lo] + (pos - static_cast<double>(lo)) * (boot[hi] - boot[lo]);
    };
    fit.ci_low = std::min(quantile(0.025), fit.lambda_hat);
    fit.ci_high = std::max(quantile(0.975), fit.lambda_hat);
  } else {
    fit.ci_low = fit.ci_high = fit.lambda_hat;
  }
  out.fit = fit;
  return out;
}

inline DecayFitOutcome fit_decay(const TimeSeries& ts, Observable o, double equilibrium_value,
                                 const FitOptions& opt = {}) {
  return fit_decay(ts.times, ts.get(o), ts.replicas, equilibrium_value, opt);
}

// ---------------------------------------------------------------------------

struct SweepRow {
  int N = 0;
  DecayFitOutcome outcome;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double relative_spread = kInf;  // (max - min) / mean of fitted rates
};

struct SweepSpec {
  std::vector<int> Ns;
  int replicas = 1000;
  double horizon = 20.0;
  int stride = 10;
  InitSpec init;
  Observable observable = Observable::MeanPosition;
  double equilibrium_value = 0.0;
  std::uint64_t seed = 1;
};

inline SweepResult n_sweep(const ModelConfig& templ, const IntegratorConfig& ic, const SweepSpec& spec,
                           const RunOptions& opt = {}, const FitOptions& fit_opt = {}) {
  if (spec.Ns.empty()) throw InvalidInput("n_sweep: empty N list");
  if (!std::is_sorted(spec.Ns.begin(), spec.Ns.end())) throw InvalidInput("n_sweep: Ns must be sorted");
  SweepResult out;
  std::vector<double> rates;
  for (int N : spec.Ns) {
    if (N < 2) throw InvalidInput("n_sweep: every N must be >= 2");
    ModelConfig m = templ;
    m.N = N;
    RunOptions ro = opt;
    ro.keep_per_replica = true;
    const RunResult rr = run(m, ic, spec.replicas, spec.horizon, spec.init, {spec.observable}, spec.stride, spec.seed, ro);
    SweepRow row{N, fit_decay(rr.series, spec.observable, spec.equilibrium_value, fit_opt)};
    if (row.outcome.fit) rates.push_back(row.outcome.fit->lambda_hat);
    out.rows.push_back(std::move(row));
  }
  if (rates.size() == spec.Ns.size()) {
    const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
    const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
    out.relative_spread = (*hi - *lo) / mean;
  }
  return out;
}

}  // namespace mfhypo
