#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gkdv/evolver.hpp"
#include "gkdv/modulation.hpp"

namespace gkdv {

/// Exponential tube around R(t) on [T0, Sn]. With r = sigma0^{3/2}:
/// ||u - R||_{H1} <= eps, e^{r t}||v||_{H1} <= r_v, e^{r t}|y| <= r_y,
/// e^{3r t/2}|a-| <= r_am, e^{3r t/2}|a+| <= r_ap.
struct TubeSpec {
  double sigma0 = 0.0;
  double eps = 0.0;
  double T0 = 0.0;
  double Sn = 0.0;
  double r_v = 1.0, r_y = 1.0, r_am = 1.0, r_ap = 1.0;

  double rate() const;
  /// e^{-(3/2) sigma0^{3/2} Sn}: radius of the admissible a_hat ball.
  double ball() const;
  /// Throws DomainError on non-positive parameters or T0 >= Sn.
  void validate() const;
};

enum class TubeCondition { None, Closeness, VBall, YBall, AMinusBall, APlusSphere };
std::string to_string(TubeCondition c);

struct TubeStatus {
  bool inside = true;
  TubeCondition failed = TubeCondition::None;
  double margin = 1.0;                ///< min over conditions of 1 - ratio
  std::array<double, 5> ratios{};     ///< quantity / threshold, in TubeCondition order
  double max_ratio() const;
};

/// sigma0 = 1/4 min{eta0, e0^{2/3} c_1, c_1, c_2 - c_1, ..., c_N - c_{N-1}}.
double compute_sigma0(const SolitonEnsemble& ens, const EdgeSpectrum& spectrum);
/// max(4, 2 / sigma0^{3/2}).
double default_T0(double sigma0);

/// 20 / sqrt(sigma0): default minimum separation at Sn.
double default_separation(double sigma0);

/// Ensemble with consecutive centers `separation` apart at Sn (default when
/// <= 0), shifted so the dual-eigenfunction supports over [T0, Sn] are
/// centered in the domain. Throws DomainError if they do not fit.
SolitonEnsemble place_ensemble(const EdgeSpectrum& spectrum, const std::vector<double>& speeds,
                               const Grid1D& grid, double T0, double Sn, double separation = 0.0);

/// Evaluates the five tube conditions in the order Closeness, VBall, YBall,
/// AMinusBall, APlusSphere; `distance` is ||u - R(t)||_{H1}.
TubeStatus tube_check(const ModulationState& state, double distance, const TubeSpec& spec);
TubeStatus tube_check(const ModulationState& state, const Field& u, const Field& reference,
                      const TubeSpec& spec);

/// psi(x) = (2/pi) arctan(e^{-a x}) and its first and third derivatives.
double cutoff(double a, double x);
double cutoff_dx(double a, double x);
double cutoff_dxxx(double a, double x);

/// Interface midpoints m_j = ((c_j + c_{j+1}) t + x_j + x_{j+1} + y_j + y_{j+1}) / 2.
std::vector<double> interface_points(const SolitonEnsemble& ens, const std::vector<double>& y,
                                     double t);

struct PartitionWeights {
  std::vector<Field> psi;  ///< psi_j(x) = cutoff(sqrt(sigma0), x - m_j), psi_N = 1
  std::vector<Field> phi;  ///< phi_1 = psi_1, phi_j = psi_j - psi_{j-1}
};
PartitionWeights diagnostics_weights(const SolitonEnsemble& ens, const std::vector<double>& y,
                                     double t, double sigma0, const Grid1D& grid);

/// f, f_x, f_xxx for f(x) = cutoff(a, x - m), the weight of Kato's identity.
struct KatoWeight {
  Field f, f_x, f_xxx;
};
KatoWeight kato_weight(double a, double m, const Grid1D& grid);

struct LocalFunctionals {
  std::vector<double> M;  ///< int u^2 phi_j
  std::vector<double> E;  ///< int (u_x^2 / 2 - u^{p+1} / (p+1)) phi_j
};
LocalFunctionals localized_functionals(const Field& u, const std::vector<Field>& phi, int p);

struct CheckRecord {
  double t = 0.0;
  double distance = 0.0;  ///< ||u - R||_{H1}
  double v_h1 = 0.0;
  std::vector<double> y, a_plus, a_minus;
  TubeStatus status;
  std::vector<double> M, E, H;
  double variation_lhs = 0.0;  ///< ||v||_{H1}^2
  double variation_rhs = 0.0;  ///< K sum H_j + K^2 sum (a+-_j)^2 (0 when K is unset)
};

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};
/// Least squares of log(values) against t over t in [t_lo, t_hi].
DecayFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& values,
                        double t_lo, double t_hi);

struct ShootOptions {
  EvolveOptions evolve = default_evolve();
  double check_interval = 0.05;   ///< tube checks every max(1, floor(interval / dt)) steps
  bool integrate_past = false;    ///< keep integrating after a tube exit
  double abort_factor = 10.0;     ///< integrate-past aborts once ||u - R||_{H1} > factor * eps
  double ball_factor = 10.0;      ///< |a_hat| may exceed the ball by this factor
  double K = 0.0;                 ///< composite constant for the variation diagnostic
  bool diagnostics = true;        ///< log M_j, E_j, H_j
  int max_bisection = 60;
  int max_broyden = 20;
  double broyden_tol = 1e-3;      ///< |a+(T0)| relative to the sphere radius at T0
  std::size_t threads = 2;

  static EvolveOptions default_evolve();
};

struct ShootResult {
  std::vector<double> a_hat;
  double Sn = 0.0, T0 = 0.0;
  double sigma0 = 0.0;
  std::vector<double> b;               ///< final-data coefficients
  std::vector<CheckRecord> log;        ///< one row per check, in decreasing t
  double T_exit = 0.0;
  TubeCondition exit_condition = TubeCondition::None;
  bool success = false;
  bool reached_T0 = false;             ///< integration got to T0 (integrate-past or success)
  std::vector<double> a_plus_exit;     ///< a+ at the exit check (or at T0)
  std::vector<double> a_plus_T0;       ///< a+ at T0 when reached_T0
  std::optional<Field> u_final;        ///< field at the last integrated time
  DecayFit decay;
  double max_mass_drift = 0.0, max_energy_drift = 0.0;
  double dt = 0.0;
  int runs = 1;                        ///< backward runs spent (find_a_hat)
  std::string note;
};

/// Shooting problem: ensemble, edge spectrum, grid and tube.
class Shooter {
 public:
  Shooter(SolitonEnsemble ens, const EdgeSpectrum& spectrum, const Grid1D& grid, TubeSpec tube,
          ShootOptions opts = {});

  const Modulator& modulator() const { return mod_; }
  const TubeSpec& tube() const { return tube_; }
  const ShootOptions& options() const { return opts_; }
  Shooter with_window(double T0, double Sn) const;

  /// Builds final data for a_hat and integrates backward from Sn to T0.
  ShootResult backward_run(const std::vector<double>& a_hat) const;
  /// Backward run from a prescribed field at Sn (bypasses final_data).
  ShootResult backward_run_from(const Field& u_Sn, bool integrate_past) const;
  ShootResult backward_run(const std::vector<double>& a_hat, bool integrate_past) const;

  /// N = 1: bisection on the sign of a+ at exit over [seed - ball, seed + ball].
  /// N >= 2: Broyden on G(a_hat) = a+(T0) (integrate past the tube), then a
  /// validating tube run.
  ShootResult find_a_hat(std::vector<double> seed = {}) const;

 private:
  ShootResult bisect(double seed) const;
  ShootResult broyden(std::vector<double> seed) const;

  EdgeSpectrum spectrum_;
  Modulator mod_;
  TubeSpec tube_;
  ShootOptions opts_;
};

/// Runs find_a_hat over increasing Sn values (fixed Sn - T0 offset unless T0
/// is fixed), seeding each with the previous a_hat rescaled by
/// e^{-(3/2) sigma0^{3/2} (Sn' - Sn)}.
std::vector<ShootResult> continuation(const Shooter& base, const std::vector<double>& Sn_list,
                                      bool fixed_T0);

/// result.json and series.csv (17 significant digits).
void write_shoot_result(const ShootResult& r, const std::filesystem::path& dir);
std::string shoot_result_json(const ShootResult& r);

}  // namespace gkdv
