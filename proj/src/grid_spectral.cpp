#include "jmgt/grid_spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace jmgt {

struct FftPlans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    ~FftPlans() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

namespace {

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void run_plan(fftw_plan p, const CVec& in, CVec& out) {
    // new-array execute; the plan is built with FFTW_UNALIGNED so any buffer works
    fftw_execute_dft(p, as_fftw(const_cast<cplx*>(in.data())), as_fftw(out.data()));
}

}  // namespace

SpectralGrid::SpectralGrid(int dim, int points, std::array<double, 3> lengths)
    : dim_(dim), n_(points), L_(lengths) {
    if (dim < 1 || dim > 3) throw GridError("grid dimension must be 1, 2 or 3");
    if (points < 8) throw GridError("need at least 8 points per dimension, got " + std::to_string(points));
    if (points % 2 != 0) throw GridError("points per dimension must be even, got " + std::to_string(points));
    for (int a = 0; a < dim; ++a)
        if (!(L_[a] > 0.0) || !std::isfinite(L_[a])) throw GridError("box length must be positive");
    for (int a = dim; a < 3; ++a) L_[a] = 1.0;

    size_ = 1;
    volume_ = 1.0;
    for (int a = 0; a < dim; ++a) {
        size_ *= static_cast<std::size_t>(n_);
        volume_ *= L_[a];
    }
    cell_ = volume_ / static_cast<double>(size_);

    for (int a = 0; a < dim; ++a) {
        kaxis_[a].resize(n_);
        for (int i = 0; i < n_; ++i) kaxis_[a][i] = 2.0 * std::numbers::pi * mode_index(i) / L_[a];
    }

    const int cut = (n_ - 1) / 3;  // strict |k| < n/3
    k2_.resize(size_);
    k2op_.resize(size_);
    mask_.resize(size_);
    for (std::size_t idx = 0; idx < size_; ++idx) {
        auto pos = unravel(idx);
        double s = 0.0;
        bool nyq = false, keep = true;
        for (int a = 0; a < dim; ++a) {
            double k = kaxis_[a][pos[a]];
            s += k * k;
            if (pos[a] == n_ / 2) nyq = true;
            if (std::abs(mode_index(pos[a])) > cut) keep = false;
        }
        k2_[idx] = s;
        k2op_[idx] = nyq ? 0.0 : s;
        mask_[idx] = keep ? 1 : 0;
    }

    plans_ = std::make_unique<FftPlans>();
    int shape[3] = {n_, n_, n_};
    CVec a(size_), b(size_);
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans_->fwd = fftw_plan_dft(dim, shape, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
    plans_->bwd = fftw_plan_dft(dim, shape, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
    if (!plans_->fwd || !plans_->bwd) throw std::runtime_error("FFTW planning failed");
}

SpectralGrid::~SpectralGrid() = default;

std::array<int, 3> SpectralGrid::unravel(std::size_t idx) const {
    std::array<int, 3> pos{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
        pos[a] = static_cast<int>(idx % n_);
        idx /= n_;
    }
    return pos;
}

std::size_t SpectralGrid::ravel(std::array<int, 3> pos) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) idx = idx * n_ + static_cast<std::size_t>(((pos[a] % n_) + n_) % n_);
    return idx;
}

std::size_t SpectralGrid::conj_index(std::size_t idx) const {
    auto pos = unravel(idx);
    for (int a = 0; a < dim_; ++a) pos[a] = (n_ - pos[a]) % n_;
    return ravel(pos);
}

std::array<double, 3> SpectralGrid::position(std::size_t idx) const {
    auto pos = unravel(idx);
    std::array<double, 3> x{0, 0, 0};
    for (int a = 0; a < dim_; ++a) x[a] = pos[a] * L_[a] / n_;
    return x;
}

GridPtr make_grid(int dim, int points, double box_length) {
    return make_grid(dim, points, {box_length, box_length, box_length});
}

GridPtr make_grid(int dim, int points, std::array<double, 3> lengths) {
    return std::make_shared<const SpectralGrid>(dim, points, lengths);
}

SpectralField::SpectralField(GridPtr g) : grid(std::move(g)) {
    if (!grid) throw GridError("field needs a grid");
    coeffs.assign(grid->size(), cplx(0.0, 0.0));
}

SpectralField::SpectralField(GridPtr g, CVec c) : grid(std::move(g)), coeffs(std::move(c)) {
    if (!grid) throw GridError("field needs a grid");
    if (coeffs.size() != grid->size()) throw GridError("coefficient array does not match grid shape");
}

void require_same_grid(const SpectralField& a, const SpectralField& b) {
    if (!a.grid || !b.grid) throw GridError("field without grid");
    if (a.grid != b.grid) {
        const auto& g = *a.grid;
        const auto& h = *b.grid;
        if (g.dim() != h.dim() || g.points() != h.points() || g.lengths() != h.lengths())
            throw GridError("fields live on different grids");
    }
    if (a.coeffs.size() != b.coeffs.size()) throw GridError("field size mismatch");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    require_same_grid(*this, o);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    require_same_grid(*this, o);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& c : coeffs) c *= s;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField axpy(const SpectralField& a, double s, const SpectralField& b) {
    require_same_grid(a, b);
    SpectralField r = a;
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] += s * b.coeffs[i];
    return r;
}

SpectralField forward_transform(const GridPtr& grid, const CVec& samples) {
    if (samples.size() != grid->size()) throw GridError("sample array does not match grid shape");
    SpectralField f(grid);
    run_plan(grid->plans().fwd, samples, f.coeffs);
    const double dv = grid->cell_volume();
    for (auto& c : f.coeffs) c *= dv;
    return f;
}

SpectralField forward_transform(const GridPtr& grid, const std::vector<double>& samples) {
    if (samples.size() != grid->size()) throw GridError("sample array does not match grid shape");
    CVec tmp(samples.begin(), samples.end());
    return forward_transform(grid, tmp);
}

CVec inverse_transform_complex(const SpectralField& f) {
    const auto& g = *f.grid;
    CVec out(g.size());
    run_plan(g.plans().bwd, f.coeffs, out);
    const double s = 1.0 / g.volume();
    for (auto& c : out) c *= s;
    return out;
}

std::vector<double> inverse_transform(const SpectralField& f) {
    CVec c = inverse_transform_complex(f);
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

SpectralField apply_laplacian(const SpectralField& f) {
    SpectralField r = f;
    const auto& k2 = f.grid->k2_op();
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] *= -k2[i];
    return r;
}

SpectralField apply_k2_power(const SpectralField& f, int p) {
    SpectralField r = f;
    const auto& k2 = f.grid->k2_op();
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] *= std::pow(k2[i], p);
    return r;
}

SpectralField apply_gradient(const SpectralField& f, int axis) {
    const auto& g = *f.grid;
    if (axis < 0 || axis >= g.dim()) throw GridError("gradient axis out of range");
    SpectralField r = f;
    const auto& kx = g.axis_wavenumbers(axis);
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
        int p = g.unravel(i)[axis];
        double k = (p == g.points() / 2 || g.k2_op()[i] == 0.0) ? 0.0 : kx[p];
        r.coeffs[i] *= cplx(0.0, k);
    }
    return r;
}

double sobolev_inner(const SpectralField& a, const SpectralField& b, int j) {
    require_same_grid(a, b);
    if (j < 0 || j > 2) throw GridError("seminorm order must be 0, 1 or 2");
    const auto& k2 = a.grid->k2_op();
    double s = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
        double w = j == 0 ? 1.0 : (j == 1 ? k2[i] : k2[i] * k2[i]);
        s += w * (a.coeffs[i].real() * b.coeffs[i].real() + a.coeffs[i].imag() * b.coeffs[i].imag());
    }
    return s / a.grid->volume();
}

double sobolev_seminorm(const SpectralField& f, int j) {
    return std::sqrt(std::max(0.0, sobolev_inner(f, f, j)));
}

double lp_norm(const SpectralGrid& grid, const std::vector<double>& samples, double p) {
    if (samples.size() != grid.size()) throw GridError("sample array does not match grid shape");
    for (double x : samples)
        if (std::isnan(x)) throw GridError("NaN sample in lp_norm");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : samples) m = std::max(m, std::abs(x));
        return m;
    }
    if (!(p >= 1.0)) throw GridError("lp_norm needs p >= 1");
    double s = 0.0;
    if (p == 2.0) {
        for (double x : samples) s += x * x;
        return std::sqrt(s * grid.cell_volume());
    }
    for (double x : samples) s += std::pow(std::abs(x), p);
    return std::pow(s * grid.cell_volume(), 1.0 / p);
}

double lp_norm(const SpectralField& f, double p) { return lp_norm(*f.grid, inverse_transform(f), p); }

SpectralField dealias(const SpectralField& f) {
    SpectralField r = f;
    const auto& m = f.grid->dealias_mask();
    for (std::size_t i = 0; i < r.coeffs.size(); ++i)
        if (!m[i]) r.coeffs[i] = 0.0;
    return r;
}

SpectralField pointwise_product(const SpectralField& a, const SpectralField& b, bool dealiased) {
    require_same_grid(a, b);
    CVec x = inverse_transform_complex(a);
    CVec y = inverse_transform_complex(b);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= y[i];
    SpectralField r = forward_transform(a.grid, x);
    return dealiased ? dealias(r) : r;
}

SpectralField hermitian_part(const SpectralField& f) {
    SpectralField r = f;
    const auto& g = *f.grid;
    for (std::size_t i = 0; i < r.coeffs.size(); ++i)
        r.coeffs[i] = 0.5 * (f.coeffs[i] + std::conj(f.coeffs[g.conj_index(i)]));
    return r;
}

double hermitian_defect(const SpectralField& f) {
    const auto& g = *f.grid;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        num += std::norm(f.coeffs[i] - std::conj(f.coeffs[g.conj_index(i)]));
        den += std::norm(f.coeffs[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace jmgt
