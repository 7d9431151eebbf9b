#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "msv/smoother.hpp"

namespace msv {

enum class DgpKind { MArch, Bekk, Msv };

/// Recipe for one synthetic panel. Parameters left unset are sampled from the
/// documented uniform rules (M-ARCH, BEKK) or filled with the documented
/// defaults (MSV); explicit values bypass sampling but are still validated.
struct DgpSpec {
  DgpKind kind = DgpKind::Msv;
  int p = 2;
  int T = 1000;
  int q_star = 1;  // number of quadratic lags in the M-ARCH recursion
  int burn_in = 500;
  std::uint64_t seed = 0;

  std::optional<Eigen::MatrixXd> omega;                // p×p intercept
  std::optional<std::vector<Eigen::MatrixXd>> a_lags;  // q* matrices, p²×p²
  std::optional<Eigen::MatrixXd> a;                    // BEKK shock loading
  std::optional<Eigen::MatrixXd> b;                    // BEKK persistence
  std::optional<Eigen::VectorXd> mu;                   // MSV log-vol level
  std::optional<Eigen::MatrixXd> phi;                  // MSV autoregression
  std::optional<Eigen::MatrixXd> sigma_eta;            // MSV innovation cov
  std::optional<Eigen::MatrixXd> gamma;                // MSV return correlation
};

/// The parameters a simulation actually ran with, whether sampled or passed
/// through from the spec. Fields that do not apply to the kind stay empty.
struct DgpParams {
  Eigen::MatrixXd omega;
  std::vector<Eigen::MatrixXd> a_lags;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::VectorXd mu;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd sigma_eta;
  Eigen::MatrixXd gamma;
};

struct SimRejections {
  long long omega_resamples = 0;           // non-PD intercept redraws
  long long pd_rejections = 0;             // non-PD H_t redraws (M-ARCH)
  long long admissibility_rejections = 0;  // inadmissible (A,B) redraws (BEKK)
};

struct SimResult {
  Eigen::MatrixXd y;      // T×p simulated returns
  CovSequence truth;      // true H_t, labels 1..T, kind Simulated
  Eigen::MatrixXd hpath;  // T×p true log-volatilities (MSV only, else 0×0)
  DgpParams params;
  SimRejections rejections;
};

/// Stationarity test for BEKK coefficients: spectral norm of
/// D_p⁺[(A⊗A)+(B⊗B)]D_p below one, with D_p the duplication matrix.
/// At p = 1 this is exactly a² + b² < 1.
bool bekk_admissible(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// H_t = Ω + Σ_k (I_p⊗ε'_{t−k}) A_k (I_p⊗ε_{t−k}), ε_t = H_t^{1/2}η_t.
/// Sampled A_k have U[0.01,0.05] diagonals and U[−0.01,0.01] off-diagonals,
/// magnitude-ordered decreasing across k; any step whose H_t is not positive
/// definite redraws the latest innovation, and the run aborts once more than
/// 1% of the steps have been rejected.
SimResult simulate_march(const DgpSpec& spec);

/// H_t = Ω + Aε_{t−1}ε'_{t−1}A' + BH_{t−1}B' seeded at H_0 = Ω. Sampled
/// (A,B) are uniform on [−0.8,0.8] rejected until admissible, capped at 10⁵
/// draws.
SimResult simulate_bekk(const DgpSpec& spec);

/// h_{t+1} = μ + Φ(h_t−μ) + η_t, y_t = diag(e^{h_t/2})ε_t with ε_t ~ N(0,Γ);
/// h₀ is drawn from the stationary law vec(Σ_h) = (I−Φ⊗Φ)⁻¹vec(Σ_η).
SimResult simulate_msv(const DgpSpec& spec);

/// Dispatches on spec.kind.
SimResult simulate(const DgpSpec& spec);

}  // namespace msv
