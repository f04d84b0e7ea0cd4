#pragma once

// Explicit constants and inequalities for s-concave measures, as evaluatable
// formulas. Unspecified universal constants are named slots in BoundConfig.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace convexmetrics {

struct BoundConfig {
    // Slots: c_dev, c_dev_exp, c_norm, c_maxdens, c_regul, c_tvbl, c_w1bl,
    // c_wqwp, c_kl, c_tsallis. Missing entries default to 1.
    std::map<std::string, double> constants;
    double alpha = 2.0;  // Hoelder exponent in (1, 2]

    static const std::vector<std::string>& constant_names();

    double constant(const std::string& name) const;
    void set_constant(const std::string& name, double value);
    double alpha_conjugate() const { return alpha / (alpha - 1.0); }
    // Throws ParameterError for alpha outside (1, 2] or nonpositive constants.
    void validate() const;
};

struct BoundResult {
    std::string formula_id;
    double value = 0.0;  // NaN when the formula is undefined at the inputs
    bool in_validity_domain = true;
    std::string violated_precondition;  // set when in_validity_domain is false
    bool vacuous = false;               // value exceeds the trivial cap
    // The named constant and its power in the value (value = c^power * rest);
    // power 0 when no constant enters or it does not factor out.
    std::string constant_name;
    double constant_power = 0.0;
    std::vector<std::pair<std::string, double>> inputs_echo;
    std::optional<double> secondary_value;  // exponential tail branch
};

// --- lemmas and constants -----------------------------------------------------

// inf over t >= M of A t^m + B / t^p, closed form.
double minimize_lemma(double A, double B, double m, double p, double M);

// Moment constant C(p, s), s in (-1/p, 0).
double const_C(double p, double s);

// s in (-1/2, 0).
double const_d0(int n, double s);
double const_c0(int n, double s);
double const_c2(double s);
double const_c1_bound(double s);

struct C1Exact {
    double c1;
    double alpha;  // root of sum 1/(1 + i kappa - alpha) = -n log c0
};
// c1 from the product formula for c0 = const_c0(n, s).
C1Exact const_c1_exact(int n, double s);

// (1+s)^(-1/s) with the limit e^-1 at s = 0; s > -1.
double grunbaum_lower(double s);

// sum_{i=1..n} (1 + i kappa)^-2, kappa > -1/n.
double varentropy_bound(int n, double kappa);

// 1 - c1_bound(s)^n.
double large_dev_lower(int n, double s);

BoundResult tail_bound_deviation(double u, int n, double s, const BoundConfig& cfg = {});
BoundResult max_density_bound(int n, double s, const BoundConfig& cfg = {});
BoundResult smoothing_l1_bound(double t, int n, double s, const BoundConfig& cfg = {});

// --- comparison theorems --------------------------------------------------------

BoundResult thm_tv_from_bl(double d_bl, int n, double s, const BoundConfig& cfg = {});
BoundResult thm_w1_from_bl(double d_bl, int n, double s, const BoundConfig& cfg = {});
BoundResult thm_wq_from_wp(double w_p, double p, double q, int n, double s, const BoundConfig& cfg = {});
BoundResult thm_kl_from_tv(double d_tv, int n, double s, const BoundConfig& cfg = {});
// M = +inf gives +inf.
BoundResult thm_tsallis_from_tv(double d_tv, int n, double s, double p, double M,
                                const BoundConfig& cfg = {});

// --- known inequalities as signed slacks (rhs - lhs) --------------------------

// (p/2) d_tv^2 <= D_p, p in (0, 1].
double pinsker_gilardoni_slack(double d_tv, double renyi, double p);
// W2^2 <= 2 D.
double talagrand_slack(double w2, double kl);
// Lower comparison D_p >= k D_q for 0 < p < q < 1 with k = p(1-q) / (q(1-p)),
// which follows from the convexity of (r - 1) D_r in r.
double renyi_interval_coeff(double p, double q);
// The larger coefficient p(1-q)/(1-p)^2. It does not hold for every pair:
// isotropic cauchy-type(beta=20) against uniform gives D_0.5 / D_0.75 = 0.411
// while this coefficient is 0.5 at (0.5, 0.75).
double renyi_interval_strong_coeff(double p, double q);
struct IntervalSlack {
    double lower;         // D_p - renyi_interval_coeff * D_q
    double lower_strong;  // D_p - renyi_interval_strong_coeff * D_q
    double upper;         // D_q - D_p
};
// 0 < p < q < 1.
IntervalSlack renyi_interval_slack(double renyi_p, double renyi_q, double p, double q);
// min{d_tv, W1} - d_bl.
double bl_cap_slack(double d_bl, double d_tv, double w1);

}  // namespace convexmetrics
