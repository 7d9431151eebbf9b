#include "msv/dgp.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "msv/errors.hpp"
#include "msv/rng.hpp"

namespace msv {
namespace {

constexpr long long kMaxParamDraws = 100000;

void require_positive(const char* name, int value) {
  if (value <= 0) throw ConfigError(std::string(name) + " must be positive");
}

void require_square(const char* name, const Eigen::MatrixXd& m, Eigen::Index n) {
  if (m.rows() != n || m.cols() != n) {
    throw ConfigError(std::string(name) + " must be " + std::to_string(n) + "x" +
                      std::to_string(n) + ", got " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
  }
}

void require_symmetric(const char* name, const Eigen::MatrixXd& m) {
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError(std::string(name) + " must be symmetric");
  }
}

struct SpectralSplit {
  Eigen::MatrixXd root;  // symmetric PSD square root, negative modes clamped
  double min_eig = 0.0;
};

SpectralSplit symmetric_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw NonPdError("eigendecomposition of a symmetric matrix failed");
  }
  SpectralSplit out;
  out.min_eig = es.eigenvalues().minCoeff();
  out.root = es.eigenvectors() *
             es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
             es.eigenvectors().transpose();
  return out;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

Eigen::VectorXd normal_vector(rng::Philox& gen, Eigen::Index p) {
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < p; ++i) z(i) = gen.normal();
  return z;
}

Eigen::MatrixXd sample_symmetric(rng::Philox& gen, Eigen::Index n, double diag_lo,
                                 double diag_hi, double off_lo, double off_hi) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v =
          i == j ? gen.uniform(diag_lo, diag_hi) : gen.uniform(off_lo, off_hi);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

Eigen::MatrixXd resolve_intercept(const DgpSpec& spec, rng::Philox& gen,
                                  SimRejections& rejections) {
  if (spec.omega) {
    require_square("omega", *spec.omega, spec.p);
    require_symmetric("omega", *spec.omega);
    if (symmetric_sqrt(*spec.omega).min_eig <= 0.0) {
      throw NonPdError("omega must be positive definite");
    }
    return *spec.omega;
  }
  for (long long draw = 0; draw < kMaxParamDraws; ++draw) {
    Eigen::MatrixXd omega = sample_symmetric(gen, spec.p, 0.1, 0.2, -0.01, 0.01);
    if (symmetric_sqrt(omega).min_eig > 0.0) return omega;
    ++rejections.omega_resamples;
  }
  throw AdmissibilitySampleExhaustedError(
      "no positive-definite intercept found within 100000 draws");
}

void validate_common(const DgpSpec& spec) {
  require_positive("p", spec.p);
  require_positive("T", spec.T);
  if (spec.burn_in < 0) throw ConfigError("burn_in must be nonnegative");
}

Eigen::MatrixXd duplication_matrix(Eigen::Index p) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p * p, p * (p + 1) / 2);
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = j; i < p; ++i) {
      d(j * p + i, col) = 1.0;
      d(i * p + j, col) = 1.0;
      ++col;
    }
  }
  return d;
}

}  // namespace

bool bekk_admissible(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index p = a.rows();
  require_square("a", a, p);
  require_square("b", b, p);
  const Eigen::MatrixXd d = duplication_matrix(p);
  // D⁺ = (D'D)⁻¹D' and D'D is diagonal (2 for mirrored pairs, 1 on the diagonal).
  const Eigen::VectorXd weights = (d.transpose() * d).diagonal().cwiseInverse();
  const Eigen::MatrixXd dplus = weights.asDiagonal() * d.transpose();
  const Eigen::MatrixXd vech_map =
      dplus * (Eigen::kroneckerProduct(a, a) + Eigen::kroneckerProduct(b, b)) * d;
  return spectral_norm(vech_map) < 1.0;
}

SimResult simulate_march(const DgpSpec& spec) {
  validate_common(spec);
  require_positive("q_star", spec.q_star);
  const Eigen::Index p = spec.p;
  const Eigen::Index n = p * p;
  rng::Philox gen(spec.seed);
  SimResult out;

  const Eigen::MatrixXd omega = resolve_intercept(spec, gen, out.rejections);

  std::vector<Eigen::MatrixXd> lags;
  if (spec.a_lags) {
    lags = *spec.a_lags;
    if (static_cast<int>(lags.size()) != spec.q_star) {
      throw ConfigError("a_lags must supply exactly q_star matrices");
    }
    for (const Eigen::MatrixXd& m : lags) {
      require_square("a_lags", m, n);
      require_symmetric("a_lags", m);
    }
  } else {
    lags.assign(spec.q_star, Eigen::MatrixXd(n, n));
    std::vector<double> draws(spec.q_star);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        for (double& v : draws) {
          v = i == j ? gen.uniform(0.01, 0.05) : gen.uniform(-0.01, 0.01);
        }
        std::sort(draws.begin(), draws.end(),
                  [](double x, double y) { return std::abs(x) > std::abs(y); });
        for (int k = 0; k < spec.q_star; ++k) {
          lags[k](i, j) = draws[k];
          lags[k](j, i) = draws[k];
        }
      }
    }
  }

  const int steps = spec.burn_in + spec.T;
  const double reject_budget = 0.01 * steps;

  std::vector<Eigen::VectorXd> history;  // ε_{t−q*}, …, ε_{t−1}
  history.reserve(spec.q_star);
  for (int k = 0; k < spec.q_star; ++k) history.push_back(normal_vector(gen, p));
  Eigen::MatrixXd prev_root = Eigen::MatrixXd::Identity(p, p);

  out.y.resize(spec.T, p);
  out.truth.kind = CovKind::Simulated;
  out.truth.horizon.reserve(spec.T);
  out.truth.matrices.reserve(spec.T);

  for (int step = 0; step < steps; ++step) {
    Eigen::MatrixXd h(p, p);
    Eigen::MatrixXd root;
    while (true) {
      h = omega;
      for (int k = 0; k < spec.q_star; ++k) {
        const Eigen::VectorXd& eps = history[history.size() - 1 - k];
        for (Eigen::Index i = 0; i < p; ++i) {
          for (Eigen::Index j = i; j < p; ++j) {
            const double quad = eps.dot(lags[k].block(i * p, j * p, p, p) * eps);
            h(i, j) += quad;
            if (i != j) h(j, i) += quad;
          }
        }
      }
      SpectralSplit split = symmetric_sqrt(h);
      if (split.min_eig > 0.0) {
        root = std::move(split.root);
        break;
      }
      ++out.rejections.pd_rejections;
      if (static_cast<double>(out.rejections.pd_rejections) > reject_budget) {
        throw AdmissibilitySampleExhaustedError(
            "more than 1% of the simulated covariances were rejected as not "
            "positive definite");
      }
      history.back() = prev_root * normal_vector(gen, p);
    }
    Eigen::VectorXd eps = root * normal_vector(gen, p);
    const int emit = step - spec.burn_in;
    if (emit >= 0) {
      out.y.row(emit) = eps.transpose();
      out.truth.horizon.push_back(emit + 1);
      out.truth.matrices.push_back(h);
    }
    history.erase(history.begin());
    history.push_back(std::move(eps));
    prev_root = std::move(root);
  }

  out.params.omega = omega;
  out.params.a_lags = std::move(lags);
  return out;
}

SimResult simulate_bekk(const DgpSpec& spec) {
  validate_common(spec);
  const Eigen::Index p = spec.p;
  rng::Philox gen(spec.seed);
  SimResult out;

  const Eigen::MatrixXd omega = resolve_intercept(spec, gen, out.rejections);

  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  if (spec.a || spec.b) {
    if (!spec.a || !spec.b) {
      throw ConfigError("explicit coefficients must supply both a and b");
    }
    a = *spec.a;
    b = *spec.b;
    require_square("a", a, p);
    require_square("b", b, p);
    if (!bekk_admissible(a, b)) {
      throw ConfigError("the provided coefficients violate the stationarity bound");
    }
  } else {
    long long draws = 0;
    while (true) {
      a.resize(p, p);
      b.resize(p, p);
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) a(i, j) = gen.uniform(-0.8, 0.8);
      }
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) b(i, j) = gen.uniform(-0.8, 0.8);
      }
      if (bekk_admissible(a, b)) break;
      ++out.rejections.admissibility_rejections;
      if (++draws >= kMaxParamDraws) {
        throw AdmissibilitySampleExhaustedError(
            "no admissible coefficient pair found within 100000 draws");
      }
    }
  }

  const int steps = spec.burn_in + spec.T;
  Eigen::VectorXd eps_prev = normal_vector(gen, p);
  Eigen::MatrixXd h_prev = omega;

  out.y.resize(spec.T, p);
  out.truth.kind = CovKind::Simulated;
  out.truth.horizon.reserve(spec.T);
  out.truth.matrices.reserve(spec.T);

  for (int step = 0; step < steps; ++step) {
    const Eigen::VectorXd shock = a * eps_prev;
    Eigen::MatrixXd h = omega + shock * shock.transpose() + b * h_prev * b.transpose();
    h = 0.5 * (h + h.transpose()).eval();
    SpectralSplit split = symmetric_sqrt(h);
    if (split.min_eig <= 0.0) {
      throw NonPdError("the simulated covariance lost positive definiteness");
    }
    Eigen::VectorXd eps = split.root * normal_vector(gen, p);
    const int emit = step - spec.burn_in;
    if (emit >= 0) {
      out.y.row(emit) = eps.transpose();
      out.truth.horizon.push_back(emit + 1);
      out.truth.matrices.push_back(h);
    }
    h_prev = std::move(h);
    eps_prev = std::move(eps);
  }

  out.params.omega = omega;
  out.params.a = std::move(a);
  out.params.b = std::move(b);
  return out;
}

SimResult simulate_msv(const DgpSpec& spec) {
  validate_common(spec);
  const Eigen::Index p = spec.p;
  rng::Philox gen(spec.seed);
  SimResult out;

  const Eigen::VectorXd mu = spec.mu ? *spec.mu : Eigen::VectorXd::Constant(p, -1.0);
  if (mu.size() != p) throw ConfigError("mu must have length p");

  const Eigen::MatrixXd phi =
      spec.phi ? *spec.phi
               : Eigen::MatrixXd(0.9 * Eigen::MatrixXd::Identity(p, p));
  require_square("phi", phi, p);
  const double rho = spectral_radius(phi);
  if (!(rho < 1.0)) {
    throw UnstablePhiError("the latent autoregression is unstable: spectral radius " +
                           std::to_string(rho));
  }

  const Eigen::MatrixXd sigma_eta =
      spec.sigma_eta ? *spec.sigma_eta
                     : Eigen::MatrixXd(0.36 * Eigen::MatrixXd::Identity(p, p));
  require_square("sigma_eta", sigma_eta, p);
  require_symmetric("sigma_eta", sigma_eta);
  SpectralSplit eta_split = symmetric_sqrt(sigma_eta);
  const double eta_scale = 1.0 + sigma_eta.cwiseAbs().maxCoeff();
  if (eta_split.min_eig < -1e-12 * eta_scale) {
    throw NonPdError("sigma_eta must be positive semidefinite");
  }

  Eigen::MatrixXd gamma = Eigen::MatrixXd::Constant(p, p, 0.3);
  gamma.diagonal().setOnes();
  if (spec.gamma) gamma = *spec.gamma;
  require_square("gamma", gamma, p);
  require_symmetric("gamma", gamma);
  if ((gamma.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
    throw ConfigError("gamma must have a unit diagonal");
  }
  Eigen::LLT<Eigen::MatrixXd> gamma_chol(gamma);
  if (gamma_chol.info() != Eigen::Success) {
    throw NonPdError("gamma must be positive definite");
  }
  const Eigen::MatrixXd gamma_root = gamma_chol.matrixL();

  const Eigen::Index n = p * p;
  const Eigen::MatrixXd stationary_map =
      Eigen::MatrixXd::Identity(n, n) - Eigen::kroneckerProduct(phi, phi);
  const Eigen::VectorXd vec_eta =
      Eigen::Map<const Eigen::VectorXd>(sigma_eta.data(), n);
  const Eigen::VectorXd vec_h = stationary_map.fullPivLu().solve(vec_eta);
  Eigen::MatrixXd sigma_h = Eigen::Map<const Eigen::MatrixXd>(vec_h.data(), p, p);
  sigma_h = 0.5 * (sigma_h + sigma_h.transpose()).eval();
  const Eigen::MatrixXd h0_root = symmetric_sqrt(sigma_h).root;

  const int steps = spec.burn_in + spec.T;
  Eigen::VectorXd h = mu + h0_root * normal_vector(gen, p);

  out.y.resize(spec.T, p);
  out.hpath.resize(spec.T, p);
  out.truth.kind = CovKind::Simulated;
  out.truth.horizon.reserve(spec.T);
  out.truth.matrices.reserve(spec.T);

  for (int step = 0; step < steps; ++step) {
    const Eigen::VectorXd d = (0.5 * h).array().exp();
    const Eigen::VectorXd eps = gamma_root * normal_vector(gen, p);
    const int emit = step - spec.burn_in;
    if (emit >= 0) {
      out.y.row(emit) = (d.cwiseProduct(eps)).transpose();
      out.hpath.row(emit) = h.transpose();
      Eigen::MatrixXd cov(p, p);
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i; j < p; ++j) {
          const double v = d(i) * d(j) * gamma(i, j);
          cov(i, j) = v;
          cov(j, i) = v;
        }
      }
      out.truth.horizon.push_back(emit + 1);
      out.truth.matrices.push_back(std::move(cov));
    }
    h = mu + phi * (h - mu) + eta_split.root * normal_vector(gen, p);
  }

  out.params.mu = mu;
  out.params.phi = phi;
  out.params.sigma_eta = sigma_eta;
  out.params.gamma = gamma;
  return out;
}

SimResult simulate(const DgpSpec& spec) {
  switch (spec.kind) {
    case DgpKind::MArch:
      return simulate_march(spec);
    case DgpKind::Bekk:
      return simulate_bekk(spec);
    case DgpKind::Msv:
      return simulate_msv(spec);
  }
  throw ConfigError("unknown simulation kind");
}

}  // namespace msv
