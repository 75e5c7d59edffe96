#include "pskill/rdmp.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pskill/csv_io.hpp"

namespace pskill::rdmp {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Second derivatives of the natural cubic spline through uniformly spaced
// samples y (Thomas algorithm on the standard tridiagonal system).
Eigen::VectorXd natural_spline_moments(const Eigen::VectorXd& y, double h) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  if (n < 3) return m;
  const Eigen::Index k = n - 2;
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(k, 4.0);
  Eigen::VectorXd rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) rhs[i] = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
  for (Eigen::Index i = 1; i < k; ++i) {
    const double c = 1.0 / diag[i - 1];
    diag[i] -= c;
    rhs[i] -= c * rhs[i - 1];
  }
  m[k] = rhs[k - 1] / diag[k - 1];
  for (Eigen::Index i = k - 2; i >= 0; --i) m[i + 1] = (rhs[i] - m[i + 2]) / diag[i];
  return m;
}

double spline_eval(const Eigen::VectorXd& y, const Eigen::VectorXd& m, double h, double t) {
  const Eigen::Index n = y.size();
  Eigen::Index i = static_cast<Eigen::Index>(std::floor(t / h));
  if (i < 0) i = 0;
  if (i > n - 2) i = n - 2;
  const double a = (static_cast<double>(i + 1) * h - t) / h;
  const double b = (t - static_cast<double>(i) * h) / h;
  return a * y[i] + b * y[i + 1] +
         ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * (h * h) / 6.0;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok));
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void RdmpParams::validate() const {
  require(centers.size() >= 2, "rdmp: need at least 2 basis functions");
  require(widths.size() == centers.size(), "rdmp: widths/centers size mismatch");
  require(weights.rows() == centers.size(), "rdmp: weights rows must equal n_basis");
  require(weights.cols() == goal.size(), "rdmp: weights cols must equal dims");
  require(goal_shift.size() == goal.size(), "rdmp: goal_shift/goal size mismatch");
  require((widths.array() > 0.0).all(), "rdmp: widths must be positive");
  require(tau > 0.0 && alpha_z > 0.0 && beta_z > 0.0, "rdmp: tau and gains must be positive");
  require(centers[0] >= 0.0 && centers[centers.size() - 1] < kTwoPi, "rdmp: centers outside [0, 2pi)");
  for (Eigen::Index i = 1; i < centers.size(); ++i) {
    require(centers[i] > centers[i - 1], "rdmp: centers must be strictly increasing");
  }
}

RdmpParams RdmpParams::make(std::size_t n_basis, std::size_t dims, double period) {
  require(n_basis >= 2, "rdmp: need at least 2 basis functions");
  require(period > 0.0, "rdmp: period must be positive");
  RdmpParams p;
  const auto n = static_cast<Eigen::Index>(n_basis);
  const auto d = static_cast<Eigen::Index>(dims);
  p.centers.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) p.centers[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
  p.widths = Eigen::VectorXd::Constant(n, 2.5 * static_cast<double>(n_basis));
  p.weights = Eigen::MatrixXd::Zero(n, d);
  p.goal = Eigen::VectorXd::Zero(d);
  p.goal_shift = Eigen::VectorXd::Zero(d);
  p.tau = period / kTwoPi;
  return p;
}

RdmpState RdmpState::at_rest(const Eigen::VectorXd& position, const RdmpParams& params) {
  RdmpState s;
  s.x = position;
  s.z = Eigen::VectorXd::Zero(position.size());
  s.phi = 0.0;
  s.goal = params.goal;
  return s;
}

Eigen::VectorXd basis_activation(double phi, const RdmpParams& params) {
  return (params.widths.array() * ((phi - params.centers.array()).cos() - 1.0)).exp();
}

Eigen::VectorXd forcing(double phi, const RdmpParams& params) {
  const Eigen::VectorXd psi = basis_activation(phi, params);
  return (params.weights.transpose() * psi) * (params.amplitude / psi.sum());
}

Eigen::VectorXd goal_target(double phi, const RdmpParams& params) {
  const double periods = std::floor(phi / kTwoPi);
  return params.goal + periods * params.goal_shift;
}

RdmpState step(const RdmpState& state, const RdmpParams& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rdmp::step: dt must be positive");
  if (dt > params.tau / 10.0) throw std::invalid_argument("rdmp::step: dt exceeds tau / 10");
  const double inv_tau = 1.0 / params.tau;
  const Eigen::VectorXd f = forcing(state.phi, params);
  const Eigen::VectorXd target = goal_target(state.phi, params);

  RdmpState next;
  next.z = state.z + dt * inv_tau *
                         (params.alpha_z * (params.beta_z * (state.goal - state.x) - state.z) + f);
  next.x = state.x + dt * inv_tau * state.z;
  next.goal = state.goal + dt * inv_tau * params.goal_rate() * (target - state.goal);
  next.phi = state.phi + dt * inv_tau;
  return next;
}

RdmpParams fit_from_demo(const Trajectory& demo, std::size_t n_basis, double period) {
  require(period > 0.0, "fit_from_demo: period must be positive");
  require(demo.dt > 0.0, "fit_from_demo: dt must be positive");
  require(demo.size() >= 3, "fit_from_demo: demo too short");
  const double span = demo.dt * static_cast<double>(demo.size() - 1);
  if (span < period * (1.0 - 1e-9)) throw std::invalid_argument("fit_from_demo: demo shorter than one period");

  RdmpParams p = RdmpParams::make(n_basis, 3, period);
  const std::size_t n = demo.size();
  const double dt = demo.dt;

  Vec3 mean = Vec3::Zero();
  for (const auto& x : demo.points) mean += x;
  mean /= static_cast<double>(n);
  p.goal = mean;

  // Central differences inside, one-sided at the ends.
  std::vector<Vec3> vel(n), acc(n);
  auto diff = [&](const std::vector<Vec3>& src, std::vector<Vec3>& dst) {
    dst[0] = (src[1] - src[0]) / dt;
    dst[n - 1] = (src[n - 1] - src[n - 2]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) dst[i] = (src[i + 1] - src[i - 1]) / (2.0 * dt);
  };
  diff(demo.points, vel);
  diff(vel, acc);

  const double tau = p.tau;
  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_basis), 3);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_basis));
  for (std::size_t t = 0; t < n; ++t) {
    const double phi = static_cast<double>(t) * dt / tau;
    const Vec3 target = tau * tau * acc[t] - p.alpha_z * (p.beta_z * (mean - demo.points[t]) - tau * vel[t]);
    const Eigen::VectorXd psi = basis_activation(phi, p);
    num += psi * target.transpose();
    den += psi;
  }
  for (Eigen::Index i = 0; i < num.rows(); ++i) {
    p.weights.row(i) = den[i] > 0.0 ? Eigen::RowVectorXd(num.row(i) / den[i]) : Eigen::RowVectorXd::Zero(3);
  }
  return p;
}

Trajectory waypoint_path(const Candidate& waypoints, double period, int samples) {
  const std::size_t L = waypoints.size();
  if (L < 3) throw std::invalid_argument("from_waypoints: need at least 3 waypoints");
  require(period > 0.0, "from_waypoints: period must be positive");
  require(samples >= 2, "from_waypoints: need at least 2 samples");
  const double h = period / static_cast<double>(L - 1);

  std::array<Eigen::VectorXd, 3> y, m;
  for (int d = 0; d < 3; ++d) {
    y[d].resize(static_cast<Eigen::Index>(L));
    for (std::size_t i = 0; i < L; ++i) y[d][static_cast<Eigen::Index>(i)] = waypoints.waypoints[i][d];
    m[d] = natural_spline_moments(y[d], h);
  }
  Trajectory path;
  path.dt = period / static_cast<double>(samples - 1);
  path.points.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) * path.dt;
    Vec3 x;
    for (int d = 0; d < 3; ++d) x[d] = spline_eval(y[d], m[d], h, t);
    path.points.push_back(x);
  }
  path.points.back() = waypoints.waypoints.back();
  return path;
}

RdmpParams from_waypoints(const Candidate& waypoints, double period, std::size_t n_basis) {
  Trajectory path = waypoint_path(waypoints, period, kStepsPerPeriod + 1);
  const Vec3 shift = waypoints.waypoints.back() - waypoints.waypoints.front();
  const double last = static_cast<double>(path.size() - 1);
  for (std::size_t k = 0; k < path.size(); ++k) path.points[k] -= shift * (static_cast<double>(k) / last);
  RdmpParams p = fit_from_demo(path, n_basis, period);
  p.goal_shift = shift;
  return p;
}

Trajectory rollout(const RdmpParams& params, double n_periods, double dt, const RdmpState& init) {
  if (n_periods < 0.0) throw std::invalid_argument("rollout: n_periods must be non-negative");
  if (init.x.size() != 3) throw std::invalid_argument("rollout: trajectories are 3D");
  const auto steps = static_cast<long>(std::llround(n_periods * params.period() / dt));
  Trajectory out;
  out.dt = dt;
  out.points.reserve(static_cast<std::size_t>(steps + 1));
  RdmpState s = init;
  out.points.emplace_back(s.x);
  for (long k = 0; k < steps; ++k) {
    s = step(s, params, dt);
    out.points.emplace_back(s.x);
  }
  return out;
}

Trajectory rollout_from(const RdmpParams& params, double n_periods, const Vec3& start) {
  return rollout(params, n_periods, params.period() / kStepsPerPeriod, RdmpState::at_rest(start, params));
}

RdmpParams rescale(const RdmpParams& params, double speed_factor, double amplitude_factor) {
  if (!(speed_factor > 0.0) || !(amplitude_factor > 0.0)) {
    throw std::invalid_argument("rescale: factors must be positive");
  }
  RdmpParams p = params;
  p.tau = params.tau / speed_factor;
  p.amplitude = params.amplitude * amplitude_factor;
  return p;
}

void write_params(std::ostream& out, const RdmpParams& p) {
  auto vec = [&](const char* key, const Eigen::VectorXd& v) {
    out << key << " =";
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
    out << '\n';
  };
  out << "n_basis = " << p.n_basis() << '\n';
  out << "dims = " << p.dims() << '\n';
  out << "amplitude = " << format_double(p.amplitude) << '\n';
  out << "tau = " << format_double(p.tau) << '\n';
  out << "alpha_z = " << format_double(p.alpha_z) << '\n';
  out << "beta_z = " << format_double(p.beta_z) << '\n';
  vec("goal", p.goal);
  vec("goal_shift", p.goal_shift);
  vec("centers", p.centers);
  vec("widths", p.widths);
  out << "weights =";
  for (Eigen::Index i = 0; i < p.weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.weights.cols(); ++j) out << ' ' << format_double(p.weights(i, j));
  }
  out << '\n';
}

RdmpParams read_params(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("read_params: malformed line: " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument(std::string("read_params: missing key ") + key);
    return it->second;
  };
  const auto n = static_cast<Eigen::Index>(std::stoul(get("n_basis")));
  const auto d = static_cast<Eigen::Index>(std::stoul(get("dims")));
  RdmpParams p;
  p.amplitude = parse_double(get("amplitude"));
  p.tau = parse_double(get("tau"));
  p.alpha_z = parse_double(get("alpha_z"));
  p.beta_z = parse_double(get("beta_z"));
  p.goal = to_vector(parse_numbers(get("goal")));
  p.goal_shift = to_vector(parse_numbers(get("goal_shift")));
  p.centers = to_vector(parse_numbers(get("centers")));
  p.widths = to_vector(parse_numbers(get("widths")));
  const auto w = parse_numbers(get("weights"));
  if (static_cast<Eigen::Index>(w.size()) != n * d) throw std::invalid_argument("read_params: weights size mismatch");
  p.weights.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) p.weights(i, j) = w[static_cast<std::size_t>(i * d + j)];
  }
  p.validate();
  return p;
}

}  // namespace pskill::rdmp
