#include "rcdlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rcdlab/errors.hpp"

namespace rcdlab {

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::vector<double> first_differences(std::span<const double> v, double h) {
    const std::size_t n = v.size();
    std::vector<double> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    return d;
}

}  // namespace

Grid1D::Grid1D(double half_width, std::size_t n_points) : half_width_(half_width), n_(n_points) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw InvalidArgument("grid half-width must be positive and finite, got " +
                              fmt_double(half_width));
    }
    if (n_points < 3 || n_points % 2 == 0) {
        throw InvalidArgument("grid size must be odd and at least 3, got " +
                              std::to_string(n_points));
    }
    h_ = 2.0 * half_width / static_cast<double>(n_points - 1);
    nodes_.resize(n_points);
    // Offsets from the centre keep the grid exactly symmetric with x = 0 on a node.
    const auto c = static_cast<std::ptrdiff_t>(center_index());
    for (std::size_t i = 0; i < n_points; ++i) {
        nodes_[i] = static_cast<double>(static_cast<std::ptrdiff_t>(i) - c) * h_;
    }
}

double Grid1D::node(std::size_t i) const noexcept { return nodes_[i]; }

std::size_t Grid1D::nearest_index(double x) const noexcept {
    const double k = std::round((x + half_width_) / h_);
    if (!(k > 0.0)) return 0;
    if (k >= static_cast<double>(n_ - 1)) return n_ - 1;
    return static_cast<std::size_t>(k);
}

Grid1D build_grid(double half_width, std::size_t n_points) { return Grid1D(half_width, n_points); }

GridFunction::GridFunction(Grid1D g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) {
        throw InvalidArgument("grid function has " + std::to_string(values.size()) +
                              " values for a grid of " + std::to_string(grid.size()));
    }
}

GridFunction GridFunction::from(const Grid1D& g, const std::function<double(double)>& fn) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = fn(g.node(i));
    return GridFunction(g, std::move(v));
}

PotentialSpec PotentialSpec::gaussian(double shift) {
    PotentialSpec s;
    s.shift = shift;
    return s;
}

PotentialSpec PotentialSpec::scaled_gaussian(double a, double shift) {
    PotentialSpec s;
    s.kind = PresetKind::ScaledGaussian;
    s.a = a;
    s.shift = shift;
    return s;
}

PotentialSpec PotentialSpec::cosine_perturbed(double epsilon, double shift) {
    PotentialSpec s;
    s.kind = PresetKind::CosinePerturbed;
    s.epsilon = epsilon;
    s.shift = shift;
    return s;
}

PotentialSpec PotentialSpec::from_table(std::vector<double> values) {
    PotentialSpec s;
    s.kind = PresetKind::Table;
    s.table = std::move(values);
    return s;
}

std::string PotentialSpec::name() const {
    switch (kind) {
        case PresetKind::Gaussian: return "gaussian";
        case PresetKind::ScaledGaussian: return "scaled_gaussian";
        case PresetKind::CosinePerturbed: return "cosine_perturbed";
        case PresetKind::Table: return "table";
        case PresetKind::Custom: return "custom";
    }
    return "custom";
}

double PotentialSpec::parameter() const noexcept {
    switch (kind) {
        case PresetKind::ScaledGaussian: return a;
        case PresetKind::CosinePerturbed: return epsilon;
        default: return 0.0;
    }
}

PresetKind parse_preset_kind(const std::string& name) {
    if (name == "gaussian") return PresetKind::Gaussian;
    if (name == "scaled_gaussian") return PresetKind::ScaledGaussian;
    if (name == "cosine_perturbed") return PresetKind::CosinePerturbed;
    if (name == "table") return PresetKind::Table;
    throw InvalidArgument("unknown potential preset '" + name + "'");
}

Potential1D::Potential1D(Grid1D grid, std::vector<double> values, std::function<double(double)> fn,
                         std::string label)
    : grid_(std::move(grid)), values_(std::move(values)), analytic_(std::move(fn)),
      label_(std::move(label)) {
    const std::size_t n = grid_.size();
    if (values_.size() != n) {
        throw InvalidArgument("potential has " + std::to_string(values_.size()) +
                              " values for a grid of " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidArgument("potential value at node " + std::to_string(i) + " is not finite");
        }
    }
    const double h = grid_.spacing();
    d1_ = first_differences(values_, h);
    d2_.assign(n, 0.0);
    modulus_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        d2_[i] = (values_[i + 1] - 2.0 * values_[i] + values_[i - 1]) / (h * h);
        if (d2_[i] < modulus_) {
            modulus_ = d2_[i];
            worst_node_ = i;
        }
    }
    d2_[0] = d2_[1];
    d2_[n - 1] = d2_[n - 2];
}

double Potential1D::evaluate(double x) const {
    if (!analytic_) throw InvalidArgument("potential '" + label_ + "' has no analytic form");
    return analytic_(x);
}

Potential1D Potential1D::from_values(Grid1D grid, std::vector<double> values, std::string label) {
    return Potential1D(std::move(grid), std::move(values), {}, std::move(label));
}

Potential1D Potential1D::from_function(Grid1D grid, std::function<double(double)> fn,
                                       std::string label) {
    if (!fn) throw InvalidArgument("potential function is empty");
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = fn(grid.node(i));
    return Potential1D(std::move(grid), std::move(v), std::move(fn), std::move(label));
}

Potential1D Potential1D::resample(const Grid1D& target) const {
    if (analytic_) return from_function(target, analytic_, label_);
    const double h = grid_.spacing();
    std::vector<double> v(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double k = (target.node(i) + grid_.half_width()) / h;
        const double kr = std::round(k);
        if (std::abs(k - kr) > 1e-6 || kr < 0.0 || kr > static_cast<double>(grid_.size() - 1)) {
            throw ResolutionError("table potential '" + label_ +
                                  "' cannot be resampled: target nodes are not a subset of its grid");
        }
        v[i] = values_[static_cast<std::size_t>(kr)];
    }
    return from_values(target, std::move(v), label_);
}

Potential1D Potential1D::translated(double offset) const {
    if (analytic_) {
        auto fn = analytic_;
        return from_function(grid_, [fn, offset](double x) { return fn(x + offset); }, label_);
    }
    // Tables move by whole cells; values beyond the ends continue as quadratics with
    // curvature at least 1 so the discrete convexity bound survives the shift.
    const auto n = static_cast<std::ptrdiff_t>(grid_.size());
    const double h = grid_.spacing();
    const auto s = static_cast<std::ptrdiff_t>(std::llround(offset / h));
    const double c_right = std::max(1.0, d2_[static_cast<std::size_t>(n - 2)]);
    const double c_left = std::max(1.0, d2_[1]);
    const double b_right = values_[n - 1] - values_[n - 2];
    const double b_left = values_[0] - values_[1];
    std::vector<double> v(grid_.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t j = i + s;
        if (j >= 0 && j < n) {
            v[i] = values_[j];
        } else if (j >= n) {
            const auto k = static_cast<double>(j - (n - 1));
            v[i] = values_[n - 1] + k * b_right + c_right * h * h * k * (k + 1.0) / 2.0;
        } else {
            const auto k = static_cast<double>(-j);
            v[i] = values_[0] + k * b_left + c_left * h * h * k * (k + 1.0) / 2.0;
        }
    }
    return from_values(grid_, std::move(v), label_);
}

void require_convexity(const Potential1D& potential) {
    if (potential.convexity_modulus() >= 1.0 - kTolConvexity) return;
    const std::size_t i = potential.worst_node();
    throw ConvexityViolation("potential '" + potential.label() + "' violates psi'' >= 1 at node " +
                                 std::to_string(i) + " (x = " + fmt_double(potential.grid().node(i)) +
                                 "): second difference " + fmt_double(potential.convexity_modulus()),
                             i, potential.convexity_modulus());
}

Potential1D make_potential(const PotentialSpec& spec, const Grid1D& grid) {
    const double c = spec.shift;
    std::function<double(double)> fn;
    switch (spec.kind) {
        case PresetKind::Gaussian:
            fn = [c](double x) { return 0.5 * (x - c) * (x - c); };
            break;
        case PresetKind::ScaledGaussian: {
            const double a = spec.a;
            fn = [a, c](double x) { return 0.5 * (1.0 + a) * (x - c) * (x - c); };
            break;
        }
        case PresetKind::CosinePerturbed: {
            const double e = spec.epsilon;
            fn = [e, c](double x) {
                const double y = x - c;
                return 0.5 * y * y + e * (0.5 * y * y + std::cos(y));
            };
            break;
        }
        case PresetKind::Table: {
            auto p = Potential1D::from_values(grid, spec.table, "table");
            require_convexity(p);
            return p;
        }
        case PresetKind::Custom:
            throw InvalidArgument("custom potentials are built with Potential1D::from_function");
    }
    auto p = Potential1D::from_function(grid, std::move(fn), spec.name());
    const double param = spec.parameter();
    if (param < 0.0 || !std::isfinite(param)) {
        const std::size_t i = p.worst_node();
        throw ConvexityViolation(spec.name() + " parameter " + fmt_double(param) +
                                     " is negative; psi'' >= 1 fails (worst node " +
                                     std::to_string(i) + ", x = " + fmt_double(grid.node(i)) + ")",
                                 i, p.convexity_modulus());
    }
    require_convexity(p);
    return p;
}

std::vector<double> read_potential_table(const std::string& text, const Grid1D& grid) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> values;
    const double tol = 1e-9 * std::max(1.0, grid.half_width());
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        for (char& ch : line) {
            if (ch == ',') ch = ' ';
        }
        std::istringstream row(line);
        double x = 0.0;
        double psi = 0.0;
        if (!(row >> x)) continue;
        if (!(row >> psi)) {
            throw InvalidArgument("potential table line " + std::to_string(line_no) +
                                  " needs two columns");
        }
        const std::size_t i = values.size();
        if (i >= grid.size() || std::abs(x - grid.node(i)) > tol) {
            throw InvalidArgument("potential table line " + std::to_string(line_no) + " node " +
                                  fmt_double(x) + " does not match grid node " + std::to_string(i));
        }
        values.push_back(psi);
    }
    if (values.size() != grid.size()) {
        throw InvalidArgument("potential table has " + std::to_string(values.size()) +
                              " rows for a grid of " + std::to_string(grid.size()));
    }
    return values;
}

double Measure1D::normalized_potential(std::size_t i) const noexcept {
    return potential_[i] + log_z_;
}

double Measure1D::segment_mass(std::size_t i) const noexcept {
    const double v = cdf_[i + 1] <= 0.5 ? cdf_[i + 1] - cdf_[i] : sf_[i] - sf_[i + 1];
    return std::max(v, 0.0);
}

double Measure1D::cdf_at(double x) const noexcept {
    const Grid1D& g = grid();
    if (x <= g.node(0)) return 0.0;
    if (x >= g.node(size() - 1)) return 1.0;
    const double t = (x - g.node(0)) / g.spacing();
    auto i = static_cast<std::size_t>(t);
    if (i >= size() - 1) i = size() - 2;
    const double frac = (x - g.node(i)) / g.spacing();
    if (cdf_[i + 1] > 0.5) return 1.0 - (sf_[i] + frac * (sf_[i + 1] - sf_[i]));
    return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
}

double Measure1D::survival_at(double x) const noexcept {
    const Grid1D& g = grid();
    if (x <= g.node(0)) return 1.0;
    if (x >= g.node(size() - 1)) return 0.0;
    const double t = (x - g.node(0)) / g.spacing();
    auto i = static_cast<std::size_t>(t);
    if (i >= size() - 1) i = size() - 2;
    const double frac = (x - g.node(i)) / g.spacing();
    if (cdf_[i + 1] <= 0.5) return 1.0 - (cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]));
    return sf_[i] + frac * (sf_[i + 1] - sf_[i]);
}

double Measure1D::integrate(std::span<const double> g) const {
    if (g.size() != size()) {
        throw InvalidArgument("integrand has " + std::to_string(g.size()) +
                              " values for a grid of " + std::to_string(size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += weights_[i] * g[i];
    return s;
}

Measure1D normalize(const Potential1D& potential) {
    Measure1D m(potential);
    const std::size_t n = potential.grid().size();
    const double h = potential.grid().spacing();
    const auto psi = potential.values();
    const double psi_min = *std::min_element(psi.begin(), psi.end());

    std::vector<double> rho(n);
    for (std::size_t i = 0; i < n; ++i) rho[i] = std::exp(-(psi[i] - psi_min));
    double z_shifted = 0.0;
    for (std::size_t i = 0; i < n; ++i) z_shifted += (i == 0 || i + 1 == n ? 0.5 : 1.0) * rho[i];
    z_shifted *= h;
    m.log_z_ = std::log(z_shifted) - psi_min;
    m.z_ = std::exp(m.log_z_);
    if (!std::isfinite(m.log_z_) || !(z_shifted > 0.0)) {
        throw DegenerateMeasure("normalization of potential '" + potential.label() +
                                "' is not a finite positive number");
    }
    if (!(m.z_ > 0.0) || !std::isfinite(m.z_)) {
        throw DegenerateMeasure("normalization of potential '" + potential.label() +
                                "' under- or overflows (log Z = " + fmt_double(m.log_z_) + ")");
    }
    for (double& r : rho) r /= z_shifted;

    m.weights_.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.weights_[i] = (i == 0 || i + 1 == n ? 0.5 : 1.0) * h * rho[i];

    // Trapezoid cumulative sums with the Euler-Maclaurin end correction, using
    // rho' = -psi' rho. The left and right sums are kept separately so both
    // tails retain relative precision.
    const auto d1 = potential.first_difference();
    std::vector<double> drho(n);
    for (std::size_t i = 0; i < n; ++i) drho[i] = -d1[i] * rho[i];
    const double corr = h * h / 12.0;

    m.cdf_.assign(n, 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        acc += 0.5 * h * (rho[i - 1] + rho[i]);
        m.cdf_[i] = std::clamp(acc - corr * (drho[i] - drho[0]), 0.0, 1.0);
        m.cdf_[i] = std::max(m.cdf_[i], m.cdf_[i - 1]);
    }
    m.cdf_[0] = 0.0;
    m.cdf_[n - 1] = 1.0;

    m.sf_.assign(n, 0.0);
    acc = 0.0;
    for (std::size_t i = n - 1; i-- > 0;) {
        acc += 0.5 * h * (rho[i] + rho[i + 1]);
        m.sf_[i] = std::clamp(acc - corr * (drho[n - 1] - drho[i]), 0.0, 1.0);
        m.sf_[i] = std::max(m.sf_[i], m.sf_[i + 1]);
    }
    m.sf_[0] = 1.0;
    m.sf_[n - 1] = 0.0;

    m.density_ = std::move(rho);

    const auto x = potential.grid().nodes();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += m.weights_[i] * x[i];
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += m.weights_[i] * (x[i] - mean) * (x[i] - mean);
    m.mean_ = mean;
    m.variance_ = var;
    m.median_ = quantile(m, 0.5);
    return m;
}

double quantile(const Measure1D& m, double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("quantile level must lie in (0, 1), got " + fmt_double(p));
    }
    if (p > 0.5) return upper_quantile(m, 1.0 - p);
    const auto F = m.cdf();
    const auto it = std::lower_bound(F.begin(), F.end(), p);
    const auto j = static_cast<std::size_t>(it - F.begin());
    const Grid1D& g = m.grid();
    const double denom = F[j] - F[j - 1];
    if (!(denom > 0.0)) return g.node(j);
    return g.node(j - 1) + g.spacing() * (p - F[j - 1]) / denom;
}

double upper_quantile(const Measure1D& m, double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw InvalidArgument("upper quantile level must lie in (0, 1), got " + fmt_double(q));
    }
    if (q > 0.5) return quantile(m, 1.0 - q);
    const auto S = m.survival();
    // First index with S_j <= q; S is nonincreasing with S_0 = 1.
    const auto it = std::lower_bound(S.begin(), S.end(), q, [](double s, double v) { return s > v; });
    const auto j = static_cast<std::size_t>(it - S.begin());
    const Grid1D& g = m.grid();
    const double denom = S[j - 1] - S[j];
    if (!(denom > 0.0)) return g.node(j - 1);
    return g.node(j - 1) + g.spacing() * (S[j - 1] - q) / denom;
}

Measure1D center_median(const Measure1D& m) {
    const double med = m.median();
    const Grid1D& g = m.grid();
    const bool analytic = m.potential().is_analytic();
    if (!analytic && std::llround(med / g.spacing()) == 0) return m;
    if (med == 0.0) return m;

    const double lost = med > 0.0 ? m.cdf_at(g.node(0) + med) : m.survival_at(g.node(g.size() - 1) + med);
    if (lost > kTruncationMass) {
        throw TruncationError("centering by " + fmt_double(med) + " pushes mass " + fmt_double(lost) +
                              " off the grid; enlarge the half-width");
    }
    auto shifted = m.potential().translated(med);
    require_convexity(shifted);
    Measure1D out = normalize(shifted);
    // One refinement absorbs the interpolation bias of the first median estimate.
    if (analytic && out.median() != 0.0) {
        auto again = shifted.translated(out.median());
        require_convexity(again);
        out = normalize(again);
    }
    return out;
}

SetOnGrid::SetOnGrid(Grid1D grid, std::vector<bool> mask) : grid_(std::move(grid)), mask_(std::move(mask)) {
    if (mask_.size() + 1 != grid_.size()) {
        throw InvalidArgument("set mask needs one entry per grid cell (" +
                              std::to_string(grid_.size() - 1) + "), got " + std::to_string(mask_.size()));
    }
}

SetOnGrid SetOnGrid::empty(const Grid1D& grid) {
    return SetOnGrid(grid, std::vector<bool>(grid.size() - 1, false));
}

SetOnGrid SetOnGrid::interval(const Grid1D& grid, double lo, double hi) {
    std::vector<bool> mask(grid.size() - 1, false);
    const double slack = 1e-9 * grid.spacing();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        mask[i] = grid.node(i) >= lo - slack && grid.node(i + 1) <= hi + slack;
    }
    return SetOnGrid(grid, std::move(mask));
}

double SetOnGrid::mass(const Measure1D& m) const {
    if (!(m.grid() == grid_)) throw InvalidArgument("set and measure live on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < mask_.size(); ++i) {
        if (mask_[i]) s += m.segment_mass(i);
    }
    return std::clamp(s, 0.0, 1.0);
}

SetOnGrid SetOnGrid::dilate(std::size_t cells) const {
    const std::size_t k = mask_.size();
    std::vector<bool> out(k, false);
    // Distance (in cells) to the nearest member, swept from both sides.
    constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max() / 2;
    std::vector<std::size_t> dist(k, kFar);
    std::size_t last = kFar;
    for (std::size_t i = 0; i < k; ++i) {
        if (mask_[i]) last = 0;
        else if (last != kFar) ++last;
        dist[i] = last;
    }
    last = kFar;
    for (std::size_t i = k; i-- > 0;) {
        if (mask_[i]) last = 0;
        else if (last != kFar) ++last;
        dist[i] = std::min(dist[i], last);
    }
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i] <= cells;
    return SetOnGrid(grid_, std::move(out));
}

SetOnGrid SetOnGrid::unite(const SetOnGrid& other) const {
    if (!(other.grid_ == grid_)) throw InvalidArgument("sets live on different grids");
    std::vector<bool> out(mask_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask_[i] || other.mask_[i];
    return SetOnGrid(grid_, std::move(out));
}

bool SetOnGrid::is_empty() const {
    return std::none_of(mask_.begin(), mask_.end(), [](bool b) { return b; });
}

bool SetOnGrid::is_full() const {
    return std::all_of(mask_.begin(), mask_.end(), [](bool b) { return b; });
}

}  // namespace rcdlab
