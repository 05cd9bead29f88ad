#pragma once

// Split-step Fourier integration of the dimensionless two-probe equation
//   i dpsi/dt = 1/2 (-d2/dx2 - d2/dy2 - x^2 - y^2 + (lambda/2)(x - y)^2) psi
// on the periodic box [-L, L)^2. Each step is the Strang splitting
// e^{-iV dt/2} e^{-iK dt} e^{-iV dt/2} with the kinetic factor applied in
// frequency space.

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "teeter/errors.hpp"
#include "teeter/flipflop.hpp"

namespace teeter::pde {

using cplx = std::complex<double>;
using flipflop::DimensionlessParams;

/// Allocator backed by fftw_malloc so arrays carry FFTW's preferred alignment.
template <class T>
struct FftwAllocator {
    using value_type = T;
    FftwAllocator() = default;
    template <class U>
    FftwAllocator(const FftwAllocator<U>&) noexcept {}
    T* allocate(std::size_t n) {
        void* p = fftw_malloc(n * sizeof(T));
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }
    template <class U>
    bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using Buffer = std::vector<cplx, FftwAllocator<cplx>>;

struct GridSpec {
    double extent = 16.0;      // half-width L
    std::size_t points = 256;  // per axis
    double dt = 1e-3;

    void validate() const {
        if (!(extent > 0) || !std::isfinite(extent)) throw validation_error("GridSpec: extent must be positive");
        if (points < 64 || !std::has_single_bit(points))
            throw validation_error("GridSpec: points must be a power of two >= 64");
        if (!(dt > 0) || !std::isfinite(dt)) throw validation_error("GridSpec: dt must be positive");
    }
    double dx() const { return 2.0 * extent / static_cast<double>(points); }
    double coord(std::size_t i) const { return -extent + static_cast<double>(i) * dx(); }
    /// Angular frequency of FFT bin i.
    double wavenumber(std::size_t i) const {
        const auto n = static_cast<long long>(points);
        const auto k = static_cast<long long>(i) < n / 2 ? static_cast<long long>(i) : static_cast<long long>(i) - n;
        return 2.0 * std::numbers::pi * static_cast<double>(k) / (2.0 * extent);
    }
};

/// psi sampled on the grid, row-major with the x index major: values[i*N + j] = psi(x_i, y_j).
struct WaveField {
    GridSpec grid;
    Buffer values;
    double time = 0.0;

    std::size_t n() const { return grid.points; }
    cplx& at(std::size_t i, std::size_t j) { return values[i * grid.points + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return values[i * grid.points + j]; }

    double norm() const {
        double s = 0.0;
        for (const auto& v : values) s += std::norm(v);
        return s * grid.dx() * grid.dx();
    }
};

/// Samples psi(x,y,0) = exp[-((x-c)^2 + (y-c)^2) / 2b^2] / (sqrt(pi) b) and renormalizes it
/// discretely. `renormalization`, if given, receives the applied factor.
inline WaveField init_gaussian(const GridSpec& grid, const DimensionlessParams& p, double* renormalization = nullptr) {
    grid.validate();
    p.validate();
    if (grid.extent < std::abs(p.c) + 8.0 * p.b)
        throw config_error("extent", "init_gaussian: extent " + std::to_string(grid.extent) +
                                         " is below |c| + 8 b = " + std::to_string(std::abs(p.c) + 8.0 * p.b));
    const std::size_t n = grid.points;
    WaveField f{grid, Buffer(n * n), 0.0};
    const double amp = 1.0 / (std::sqrt(std::numbers::pi) * p.b);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = grid.coord(i) - p.c;
        g[i] = std::exp(-d * d / (2.0 * p.b * p.b));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) f.at(i, j) = amp * g[i] * g[j];
    const double scale = 1.0 / std::sqrt(f.norm());
    for (auto& v : f.values) v *= scale;
    if (renormalization) *renormalization = scale;
    return f;
}

/// V(x,y) = 1/2 (-x^2 - y^2 + (lambda/2)(x-y)^2).
inline double potential(double lambda, double x, double y) {
    return 0.5 * (-x * x - y * y + 0.5 * lambda * (x - y) * (x - y));
}

namespace detail {
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
inline void init_threads_once() {
    static const bool ok = fftw_init_threads() != 0;
    (void)ok;
}
}  // namespace detail

struct StepOptions {
    double window_fraction = 0.8;   // mass is monitored inside |x|,|y| <= fraction * L
    double window_loss = 1e-4;      // tolerated mass outside the window
    double norm_loss = 1e-3;        // tolerated drift of the total norm over a run
};

/// Owns FFTW plans and the phase tables for one (grid, parameters) pair.
/// Plans use FFTW_ESTIMATE, so results are bitwise reproducible for a fixed
/// thread count.
class SplitStepSolver {
public:
    SplitStepSolver(const GridSpec& grid, const DimensionlessParams& p, int threads = 1, StepOptions opts = {})
        : grid_(grid), params_(p), opts_(opts) {
        grid_.validate();
        p.validate();
        const std::size_t n = grid_.points;
        scratch_ = Buffer(n * n);
        {
            std::lock_guard lock(detail::planner_mutex());
            detail::init_threads_once();
            fftw_plan_with_nthreads(threads < 1 ? 1 : threads);
            auto* ptr = reinterpret_cast<fftw_complex*>(scratch_.data());
            const int ni = static_cast<int>(n);
            forward_ = fftw_plan_dft_2d(ni, ni, ptr, ptr, FFTW_FORWARD, FFTW_ESTIMATE);
            backward_ = fftw_plan_dft_2d(ni, ni, ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        if (!forward_ || !backward_) throw error("SplitStepSolver: FFTW planning failed");

        half_v_.resize(n * n);
        full_v_.resize(n * n);
        kinetic_.resize(n * n);
        in_window_.resize(n * n);
        const double dt = grid_.dt;
        const double norm = 1.0 / static_cast<double>(n * n);
        const double wlim = opts_.window_fraction * grid_.extent;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid_.coord(i);
            const double kx = grid_.wavenumber(i);
            for (std::size_t j = 0; j < n; ++j) {
                const double y = grid_.coord(j);
                const double ky = grid_.wavenumber(j);
                const double v = potential(p.lambda, x, y);
                half_v_[i * n + j] = std::polar(1.0, -0.5 * dt * v);
                full_v_[i * n + j] = std::polar(1.0, -dt * v);
                kinetic_[i * n + j] = std::polar(norm, -0.5 * dt * (kx * kx + ky * ky));
                in_window_[i * n + j] = std::abs(x) <= wlim && std::abs(y) <= wlim;
            }
        }
    }

    SplitStepSolver(const SplitStepSolver&) = delete;
    SplitStepSolver& operator=(const SplitStepSolver&) = delete;

    ~SplitStepSolver() {
        std::lock_guard lock(detail::planner_mutex());
        if (forward_) fftw_destroy_plan(forward_);
        if (backward_) fftw_destroy_plan(backward_);
    }

    const GridSpec& grid() const { return grid_; }
    const DimensionlessParams& params() const { return params_; }

    /// Advances n Strang steps. Throws domain_exhausted once the mass inside the
    /// monitoring window falls below 1 - window_loss or the norm drifts by more
    /// than norm_loss; the field is then left at the offending step.
    void step(WaveField& f, std::size_t steps) {
        if (steps == 0) throw domain_error("step: need at least one step");
        check_grid(f);
        const std::size_t total = f.values.size();
        const double cell = grid_.dx() * grid_.dx();
        if (run_norm_ < 0) run_norm_ = f.norm();
        cplx* psi = f.values.data();
        auto* fpsi = reinterpret_cast<fftw_complex*>(psi);

        for (std::size_t k = 0; k < total; ++k) psi[k] *= half_v_[k];
        for (std::size_t s = 0; s < steps; ++s) {
            const double t_prev = f.time;
            fftw_execute_dft(forward_, fpsi, fpsi);
            for (std::size_t k = 0; k < total; ++k) psi[k] *= kinetic_[k];
            fftw_execute_dft(backward_, fpsi, fpsi);
            const auto& phase = s + 1 == steps ? half_v_ : full_v_;
            double mass = 0.0, inside = 0.0;
            for (std::size_t k = 0; k < total; ++k) {
                psi[k] *= phase[k];
                const double a = std::norm(psi[k]);
                mass += a;
                if (in_window_[k]) inside += a;
            }
            mass *= cell;
            inside *= cell;
            f.time = t_prev + grid_.dt;
            ++steps_taken_;
            last_norm_ = mass;
            if (inside < mass * (1.0 - opts_.window_loss))
                throw domain_exhausted("wavepacket left the monitoring window at t = " + std::to_string(f.time),
                                       t_prev);
            if (std::abs(mass - run_norm_) > opts_.norm_loss)
                throw domain_exhausted("norm drifted beyond tolerance at t = " + std::to_string(f.time), t_prev);
        }
    }

    /// Steps until f.time reaches t (t must be a whole number of steps ahead).
    void advance_to(WaveField& f, double t) {
        const double steps = (t - f.time) / grid_.dt;
        const double r = std::round(steps);
        if (r < 0 || std::abs(steps - r) > 1e-6)
            throw domain_error("advance_to: target time is not reachable in whole steps of dt");
        if (r > 0) step(f, static_cast<std::size_t>(r));
        f.time = t;
    }

    double last_norm() const { return last_norm_; }
    std::size_t steps_taken() const { return steps_taken_; }

    /// Squared magnitude of the discrete Fourier coefficients of f, normalized to sum 1.
    std::vector<double> spectrum(const WaveField& f) {
        check_grid(f);
        std::copy(f.values.begin(), f.values.end(), scratch_.begin());
        auto* p = reinterpret_cast<fftw_complex*>(scratch_.data());
        fftw_execute_dft(forward_, p, p);
        std::vector<double> out(scratch_.size());
        double s = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) s += out[k] = std::norm(scratch_[k]);
        for (auto& v : out) v /= s;
        return out;
    }

    /// <p_v^2>/2 + (lambda - 1) <v^2>/2 for v = (x - y)/sqrt2.
    double v_mode_energy(const WaveField& f) {
        const auto spec = spectrum(f);
        const std::size_t n = grid_.points;
        double kin = 0.0, pot = 0.0;
        const double cell = grid_.dx() * grid_.dx();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double dk = grid_.wavenumber(i) - grid_.wavenumber(j);
                kin += spec[i * n + j] * 0.5 * dk * dk;
                const double v = (grid_.coord(i) - grid_.coord(j)) / std::numbers::sqrt2;
                pot += std::norm(f.at(i, j)) * cell * v * v;
            }
        return 0.5 * kin + 0.5 * (params_.lambda - 1.0) * pot;
    }

private:
    void check_grid(const WaveField& f) const {
        if (f.grid.points != grid_.points || f.grid.extent != grid_.extent || f.values.size() != grid_.points * grid_.points)
            throw structural_error("SplitStepSolver: field grid does not match the solver grid");
    }

    GridSpec grid_;
    DimensionlessParams params_;
    StepOptions opts_;
    Buffer scratch_;
    Buffer half_v_, full_v_, kinetic_;
    std::vector<bool> in_window_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
    double run_norm_ = -1.0;
    double last_norm_ = 1.0;
    std::size_t steps_taken_ = 0;
};

/// One-shot helper: copy the field and advance it n steps.
inline WaveField step(const WaveField& field, const DimensionlessParams& p, std::size_t n, int threads = 1) {
    SplitStepSolver solver(field.grid, p, threads);
    WaveField out = field;
    solver.step(out, n);
    return out;
}

/// Probability mass on cells with x y < 0; cells on an axis count half.
inline double quadrant_probability(const WaveField& f) {
    const std::size_t n = f.n();
    const std::size_t zero = n / 2;  // coord(n/2) == 0 exactly
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double w;
            if (i == zero || j == zero) w = 0.5;
            else w = (i < zero) != (j < zero) ? 1.0 : 0.0;
            if (w > 0) s += w * std::norm(f.at(i, j));
        }
    return std::clamp(s * f.grid.dx() * f.grid.dx(), 0.0, 1.0);
}

struct UVMoments {
    double mean_u, var_u, mean_v, var_v;
};

inline UVMoments uv_moments(const WaveField& f) {
    const std::size_t n = f.n();
    const double cell = f.grid.dx() * f.grid.dx();
    double m = 0, su = 0, suu = 0, sv = 0, svv = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double w = std::norm(f.at(i, j)) * cell;
            const double u = (f.grid.coord(i) + f.grid.coord(j)) / std::numbers::sqrt2;
            const double v = (f.grid.coord(i) - f.grid.coord(j)) / std::numbers::sqrt2;
            m += w;
            su += w * u;
            suu += w * u * u;
            sv += w * v;
            svv += w * v * v;
        }
    const double mu = su / m, mv = sv / m;
    return {mu, suu / m - mu * mu, mv, svv / m - mv * mv};
}

/// Tr[rho_x^2] for the reduced density of the x-particle.
inline double x_marginal_purity(const WaveField& f) {
    const auto n = static_cast<Eigen::Index>(f.n());
    using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> psi(f.values.data(), n, n);
    const Eigen::MatrixXcd a = psi * f.grid.dx();
    const Eigen::MatrixXcd rho = a * a.adjoint();
    const double tr = rho.trace().real();
    return rho.squaredNorm() / (tr * tr);
}

/// L1 distance between |psi|^2 and the product of its (u,v) marginals.
/// Grid lines i+j = const have constant u, lines i-j = const constant v.
inline double uv_separability_defect(const WaveField& f) {
    const std::size_t n = f.n();
    const double dx = f.grid.dx();
    std::vector<double> pu(2 * n - 1, 0.0), pv(2 * n - 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double rho = std::norm(f.at(i, j));
            pu[i + j] += rho;
            pv[i + n - 1 - j] += rho;
        }
    // Sample spacing along each line is sqrt2 dx.
    for (auto& v : pu) v *= std::numbers::sqrt2 * dx;
    for (auto& v : pv) v *= std::numbers::sqrt2 * dx;
    double l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            l1 += std::abs(std::norm(f.at(i, j)) - pu[i + j] * pv[i + n - 1 - j]);
    return l1 * dx * dx;
}

struct ConvergenceRow {
    GridSpec grid;
    double pde;
    double analytic;
    double error;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    // Temporal orders from successive differences |P_k - P_{k+1}|, one per
    // consecutive triple of rows. The axis half-weighting leaves an O(dx^2)
    // quadrature floor in the error against the analytic value, so these
    // differences, not that error, expose the splitting order.
    std::vector<double> orders;
    std::vector<double> difference_ratios;  // |P_{k-1} - P_k| / |P_k - P_{k+1}|
    std::vector<double> analytic_orders;    // same, from |P_k - analytic|
    bool monotone = true;                   // errors against analytic decrease along the sequence
    bool order_ok = false;                  // every entry of orders >= 1.9
};

/// Runs each grid to t_final and compares the quadrant probability with the
/// analytic value. Orders use the dt ratio of consecutive grids and are
/// meaningful when the spatial grid is held fixed.
inline ConvergenceReport convergence_study(const DimensionlessParams& p, double t_final,
                                           const std::vector<GridSpec>& grids, int threads = 1) {
    if (grids.size() < 3) throw domain_error("convergence_study: need at least three grids");
    for (std::size_t k = 1; k < grids.size(); ++k)
        if (!(grids[k].dt < grids[k - 1].dt)) throw domain_error("convergence_study: dt must decrease along the sequence");
    ConvergenceReport rep;
    const double exact = p.c == 0.0 ? flipflop::disagreement_probability(p, t_final) : flipflop::quadrant_integral(p, t_final);
    for (const auto& g : grids) {
        WaveField f = init_gaussian(g, p);
        if (t_final > 0) {
            SplitStepSolver solver(g, p, threads);
            solver.advance_to(f, t_final);
        }
        const double v = quadrant_probability(f);
        rep.rows.push_back({g, v, exact, std::abs(v - exact)});
    }
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    auto order_of = [&](double e0, double e1, double ratio) {
        return (e0 > 0 && e1 > 0) ? std::log(e0 / e1) / std::log(ratio) : nan;
    };
    for (std::size_t k = 1; k < rep.rows.size(); ++k) {
        const auto& a = rep.rows[k - 1];
        const auto& b = rep.rows[k];
        if (!(b.error < a.error)) rep.monotone = false;
        rep.analytic_orders.push_back(order_of(a.error, b.error, a.grid.dt / b.grid.dt));
    }
    rep.order_ok = true;
    for (std::size_t k = 1; k + 1 < rep.rows.size(); ++k) {
        const double d0 = std::abs(rep.rows[k - 1].pde - rep.rows[k].pde);
        const double d1 = std::abs(rep.rows[k].pde - rep.rows[k + 1].pde);
        rep.difference_ratios.push_back(d1 > 0 ? d0 / d1 : nan);
        const double o = order_of(d0, d1, rep.rows[k].grid.dt / rep.rows[k + 1].grid.dt);
        rep.orders.push_back(o);
        if (!(o >= 1.9)) rep.order_ok = false;
    }
    return rep;
}

// ---- snapshot export ------------------------------------------------------

namespace detail {
template <class T>
void write_le(std::ostream& os, T v) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    os.write(reinterpret_cast<const char*>(&bits), 8);
}
template <class T>
T read_le(std::istream& is) {
    std::uint64_t bits = 0;
    is.read(reinterpret_cast<char*>(&bits), 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    T v;
    std::memcpy(&v, &bits, 8);
    return v;
}
}  // namespace detail

/// Header: N (int64), L (float64), t (float64), little-endian; then N*N row-major (re, im) float64 pairs.
inline void write_snapshot(const std::string& path, const WaveField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error("write_snapshot: cannot open " + path);
    detail::write_le<std::int64_t>(os, static_cast<std::int64_t>(f.n()));
    detail::write_le<double>(os, f.grid.extent);
    detail::write_le<double>(os, f.time);
    for (const auto& v : f.values) {
        detail::write_le<double>(os, v.real());
        detail::write_le<double>(os, v.imag());
    }
    if (!os) throw error("write_snapshot: write failed for " + path);
}

/// Reads a snapshot; dt is not stored and is returned as 1.
inline WaveField read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw error("read_snapshot: cannot open " + path);
    const auto n = detail::read_le<std::int64_t>(is);
    const double l = detail::read_le<double>(is);
    const double t = detail::read_le<double>(is);
    if (!is || n < 1 || n > (1 << 16)) throw validation_error("read_snapshot: bad header in " + path);
    WaveField f{GridSpec{l, static_cast<std::size_t>(n), 1.0}, Buffer(static_cast<std::size_t>(n * n)), t};
    for (auto& v : f.values) {
        const double re = detail::read_le<double>(is);
        const double im = detail::read_le<double>(is);
        v = {re, im};
    }
    if (!is) throw validation_error("read_snapshot: truncated payload in " + path);
    return f;
}

/// CSV "x,px,py" with the marginal densities of the two probes.
inline void write_marginals_csv(const std::string& path, const WaveField& f) {
    std::ofstream os(path);
    if (!os) throw error("write_marginals_csv: cannot open " + path);
    const std::size_t n = f.n();
    const double dx = f.grid.dx();
    std::vector<double> px(n, 0.0), py(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double r = std::norm(f.at(i, j)) * dx;
            px[i] += r;
            py[j] += r;
        }
    os.precision(17);
    os << "x,px,py\n";
    for (std::size_t i = 0; i < n; ++i) os << f.grid.coord(i) << ',' << px[i] << ',' << py[i] << '\n';
}

}  // namespace teeter::pde
