#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rcdlab {

inline constexpr double kTolConvexity = 1e-8;
inline constexpr double kTruncationMass = 1e-10;

// Uniform grid on [-R, R] with an odd number of nodes, so x = 0 is a node.
class Grid1D {
public:
    Grid1D(double half_width, std::size_t n_points);

    double half_width() const noexcept { return half_width_; }
    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return h_; }
    double node(std::size_t i) const noexcept;
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::size_t center_index() const noexcept { return (n_ - 1) / 2; }

    /// Node index whose value is closest to x, clamped to the grid.
    std::size_t nearest_index(double x) const noexcept;

    friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept {
        return a.n_ == b.n_ && a.half_width_ == b.half_width_;
    }

private:
    double half_width_;
    std::size_t n_;
    double h_;
    std::vector<double> nodes_;
};

Grid1D build_grid(double half_width, std::size_t n_points);

struct GridFunction {
    Grid1D grid;
    std::vector<double> values;

    GridFunction(Grid1D g, std::vector<double> v);
    static GridFunction from(const Grid1D& g, const std::function<double(double)>& fn);

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
};

enum class PresetKind { Gaussian, ScaledGaussian, CosinePerturbed, Table, Custom };

// Preset description. `shift` translates the preset: psi(x - shift).
struct PotentialSpec {
    PresetKind kind = PresetKind::Gaussian;
    double a = 0.0;        // scaled_gaussian
    double epsilon = 0.0;  // cosine_perturbed
    double shift = 0.0;
    std::vector<double> table;  // one value per grid node

    static PotentialSpec gaussian(double shift = 0.0);
    static PotentialSpec scaled_gaussian(double a, double shift = 0.0);
    static PotentialSpec cosine_perturbed(double epsilon, double shift = 0.0);
    static PotentialSpec from_table(std::vector<double> values);

    std::string name() const;
    /// Primary numeric parameter (a, epsilon, or 0).
    double parameter() const noexcept;
};

PresetKind parse_preset_kind(const std::string& name);

class Potential1D {
public:
    const Grid1D& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Central differences (second-order one-sided at the two ends).
    std::span<const double> first_difference() const noexcept { return d1_; }
    /// Second central differences over h^2; the end entries copy their neighbours.
    std::span<const double> second_difference() const noexcept { return d2_; }

    double convexity_modulus() const noexcept { return modulus_; }
    std::size_t worst_node() const noexcept { return worst_node_; }

    const std::string& label() const noexcept { return label_; }
    bool is_analytic() const noexcept { return static_cast<bool>(analytic_); }
    /// Analytic form, when the potential came from a preset or a callable.
    double evaluate(double x) const;

    /// Same potential on another grid: analytic re-evaluation, or subsampling of a
    /// table when the target grid's nodes are a subset of this grid's nodes.
    Potential1D resample(const Grid1D& target) const;

    /// Potential translated so that the new psi(x) equals the old psi(x + offset).
    Potential1D translated(double offset) const;

    static Potential1D from_values(Grid1D grid, std::vector<double> values, std::string label);
    static Potential1D from_function(Grid1D grid, std::function<double(double)> fn,
                                     std::string label);

private:
    Potential1D(Grid1D grid, std::vector<double> values, std::function<double(double)> fn,
                std::string label);

    Grid1D grid_;
    std::vector<double> values_;
    std::vector<double> d1_;
    std::vector<double> d2_;
    double modulus_ = 0.0;
    std::size_t worst_node_ = 0;
    std::function<double(double)> analytic_;
    std::string label_;
};

/// Builds a preset potential and enforces the discrete convexity bound psi'' >= 1.
/// Throws ConvexityViolation (naming the worst node) when the bound fails.
Potential1D make_potential(const PotentialSpec& spec, const Grid1D& grid);

/// Convexity check shared by every constructor path.
void require_convexity(const Potential1D& potential);

/// Parses a two-column (node, value) table and checks that the nodes match the grid.
std::vector<double> read_potential_table(const std::string& text, const Grid1D& grid);

// Normalized measure e^{-psi}/Z on the grid.
class Measure1D {
public:
    const Potential1D& potential() const noexcept { return potential_; }
    const Grid1D& grid() const noexcept { return potential_.grid(); }
    std::size_t size() const noexcept { return density_.size(); }

    double normalization() const noexcept { return z_; }
    double log_normalization() const noexcept { return log_z_; }
    std::span<const double> density() const noexcept { return density_; }
    /// Trapezoid node weights rho_i * h (half at the ends); they sum to 1.
    std::span<const double> weights() const noexcept { return weights_; }
    /// Mass of (-inf, x_i]; F_0 = 0, F_{n-1} = 1.
    std::span<const double> cdf() const noexcept { return cdf_; }
    /// Mass of [x_i, inf), computed from the right so upper tails keep precision.
    std::span<const double> survival() const noexcept { return sf_; }

    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }
    double median() const noexcept { return median_; }

    /// Normalized potential phi = psi + log Z, so that density = e^{-phi}.
    double normalized_potential(std::size_t i) const noexcept;

    /// Mass of the segment [x_i, x_{i+1}].
    double segment_mass(std::size_t i) const noexcept;
    double cdf_at(double x) const noexcept;
    double survival_at(double x) const noexcept;

    /// Integral of g against the measure (trapezoid weights).
    double integrate(std::span<const double> g) const;

private:
    friend Measure1D normalize(const Potential1D& potential);
    explicit Measure1D(Potential1D potential) : potential_(std::move(potential)) {}

    Potential1D potential_;
    double z_ = 0.0;
    double log_z_ = 0.0;
    std::vector<double> density_;
    std::vector<double> weights_;
    std::vector<double> cdf_;
    std::vector<double> sf_;
    double mean_ = 0.0;
    double variance_ = 0.0;
    double median_ = 0.0;
};

Measure1D normalize(const Potential1D& potential);

/// Piecewise-linear inverse of the CDF. Throws InvalidArgument for p outside (0, 1).
double quantile(const Measure1D& m, double p);
/// Point x with survival mass q to its right; precise for small q.
double upper_quantile(const Measure1D& m, double q);

/// Translates the potential so the median sits at the origin (within h).
/// Throws TruncationError when more than 1e-10 of mass would leave the grid.
Measure1D center_median(const Measure1D& m);

// Union of grid segments [x_i, x_{i+1}]; mask has n - 1 entries.
class SetOnGrid {
public:
    SetOnGrid(Grid1D grid, std::vector<bool> mask);

    static SetOnGrid empty(const Grid1D& grid);
    /// Segments contained in [lo, hi].
    static SetOnGrid interval(const Grid1D& grid, double lo, double hi);

    const Grid1D& grid() const noexcept { return grid_; }
    const std::vector<bool>& mask() const noexcept { return mask_; }
    std::size_t cell_count() const noexcept { return mask_.size(); }
    bool contains(std::size_t cell) const { return mask_[cell]; }

    double mass(const Measure1D& m) const;
    /// Dilation by whole cells; contains the open t-neighbourhood for cells = ceil(t/h).
    SetOnGrid dilate(std::size_t cells) const;
    SetOnGrid unite(const SetOnGrid& other) const;
    bool is_empty() const;
    bool is_full() const;

private:
    Grid1D grid_;
    std::vector<bool> mask_;
};

}  // namespace rcdlab
