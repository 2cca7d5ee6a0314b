#pragma once

#include <optional>
#include <vector>

#include "rcdlab/measures.hpp"
#include "rcdlab/transport.hpp"

namespace rcdlab {

inline constexpr double kObsTolerance = 1e-3;

struct SepReport {
    double kappa = 0.0;
    double sep = 0.0;
    double gaussian_sep = 0.0;  // 2 |sigma^{-1}(kappa)|
    double deficit = 0.0;       // gaussian_sep - sep
    double lower = 0.0;         // witness half-lines (-inf, lower] and [upper, inf)
    double upper = 0.0;
};

/// Largest distance between two sets of mass >= kappa; in 1D the extremal sets are
/// opposing half-lines cut at the quantiles. Requires kappa in (0, 1/2).
SepReport separation(const Measure1D& m, double kappa);
SepReport separation(const Distribution1D& d, double kappa);

struct ObsDiamReport {
    double kappa = 0.0;
    double dobs = 0.0;
    double window_lo = 0.0;  // a shortest interval of mass >= 1 - kappa
    double window_hi = 0.0;
    double sep_upper = 0.0;  // separation at kappa / 2
    bool holds = false;      // dobs <= sep_upper + tolerance
};

/// Shortest length of an interval carrying mass >= 1 - kappa. A 1-Lipschitz image
/// cannot shorten this below the identity's value, so it is the observable diameter.
ObsDiamReport observable_diameter(const Measure1D& m, double kappa, double tolerance = kObsTolerance);
ObsDiamReport observable_diameter(const Distribution1D& d, double kappa, double tolerance = kObsTolerance);

/// Separation when sets are unions of grid cells; witnesses are whole-cell half-lines
/// (-inf, lower] and [upper, inf).
SepReport separation_on_cells(const Measure1D& m, double kappa);
/// Shortest run of consecutive cells carrying mass >= 1 - kappa.
double observable_diameter_on_cells(const Measure1D& m, double kappa);

/// Observable diameter of the standard Gaussian, 2 |sigma^{-1}(kappa / 2)|.
double gaussian_observable_diameter(double kappa);

struct IsoperimetryReport {
    double min_profile_ratio = 0.0;
    double at = 0.0;
    bool holds = false;  // ratio >= 1 - 1e-3
};

/// Density over the Gaussian isoperimetric profile at the mass of (-inf, x], minimized
/// over nodes with F in [1e-6, 1 - 1e-6].
IsoperimetryReport isoperimetric_check(const Measure1D& m);

struct GrowthReport {
    double mass = 0.0;
    double t = 0.0;
    double lhs = 0.0;  // mass of the dilated set
    double rhs = 0.0;  // sigma(sigma^{-1}(m(A)) + t)
    bool holds = false;
};

GrowthReport neighborhood_growth_check(const Measure1D& m, const SetOnGrid& a, double t, double tolerance = 1e-8);

/// Gap between the closures of two sets of grid cells; 0 when they touch.
double set_distance(const SetOnGrid& a, const SetOnGrid& b);

struct CloseMassReport {
    double distance = 0.0;
    double bound = 0.0;  // -sigma^{-1}(m(A1)) - sigma^{-1}(m(A2))
    bool holds = false;
};

CloseMassReport closemass_check(const Measure1D& m, const SetOnGrid& a1, const SetOnGrid& a2,
                                double tolerance = kObsTolerance);

/// Smallest (1 - theta - gamma([s - R/2, s + R/2])) / s^2 over 0 < |s| <= s_max, with
/// theta fixed by the centred window.
double gaussian_window_stability(double R, double s_max = 0.1);

struct MassBoundCheck {
    double s = 0.0;
    int side = 1;  // 1 for A1 = (-inf, a-], 2 for A2 = [a+, inf)
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

struct ConverseDiagnostics {
    double kappa = 0.0;
    double eta = 0.0;        // Sep(gamma; kappa/2) - Sep(m; kappa/2)
    double a_minus = 0.0;    // witness sets (-inf, a-] and [a+, inf) after median centring
    double a_plus = 0.0;
    double alpha_minus = 0.0;
    double alpha_plus = 0.0;
    double a_eta = 0.0;      // |sigma^{-1}(sqrt(eta))|
    double b_eta = 0.0;
    double sup_phi_dev_core = 0.0;      // on [a-, a+]
    double sup_phi_dev_extended = 0.0;  // on [-b_eta, b_eta]
    double mean = 0.0;
    double variance = 0.0;
    double var_deficit = 0.0;  // 1 - Var
    double lambda1 = 0.0;
    double gap_deficit = 0.0;  // lambda1 - 1
    std::vector<MassBoundCheck> mass_bounds;
    bool mass_bounds_hold = false;
};

/// Diagnostics for the converse direction on a 1D measure. The eigenvalue is computed
/// when not supplied. Throws ResolutionError when the witness quantiles fall in an end cell.
ConverseDiagnostics converse_diagnostics(const Measure1D& m, double kappa,
                                         std::optional<double> lambda1 = std::nullopt);

}  // namespace rcdlab
