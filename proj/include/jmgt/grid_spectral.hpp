// Periodic box grids, FFTs, spectral operators and norms.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace jmgt {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

class GridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FftPlans;

// Descriptor of a periodic box [0,L_0) x ... sampled with n points per dim.
// Index layout is row-major with the first axis slowest.
class SpectralGrid {
public:
    SpectralGrid(int dim, int points, std::array<double, 3> lengths);
    ~SpectralGrid();
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    int dim() const { return dim_; }
    int points() const { return n_; }
    double length(int axis) const { return L_[axis]; }
    std::array<double, 3> lengths() const { return L_; }
    std::size_t size() const { return size_; }
    double volume() const { return volume_; }
    double cell_volume() const { return cell_; }

    // wavenumbers along one axis, 2*pi*k/L with k in {0,..,n/2,-n/2+1,..,-1}
    const std::vector<double>& axis_wavenumbers(int axis) const { return kaxis_[axis]; }
    // integer index k of mode position i along an axis
    int mode_index(int i) const { return i <= n_ / 2 ? i : i - n_; }

    // |xi|^2 per mode (true), and with any Nyquist component mapped to 0
    const std::vector<double>& k2() const { return k2_; }
    const std::vector<double>& k2_op() const { return k2op_; }
    // true where every component satisfies |k| < n/3
    const std::vector<char>& dealias_mask() const { return mask_; }

    std::array<int, 3> unravel(std::size_t idx) const;
    std::size_t ravel(std::array<int, 3> pos) const;
    // index of the mode at -xi
    std::size_t conj_index(std::size_t idx) const;
    // sample position x for flat index
    std::array<double, 3> position(std::size_t idx) const;

    FftPlans& plans() const { return *plans_; }

private:
    int dim_;
    int n_;
    std::array<double, 3> L_;
    std::size_t size_;
    double volume_;
    double cell_;
    std::array<std::vector<double>, 3> kaxis_;
    std::vector<double> k2_, k2op_;
    std::vector<char> mask_;
    std::unique_ptr<FftPlans> plans_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

GridPtr make_grid(int dim, int points, double box_length);
GridPtr make_grid(int dim, int points, std::array<double, 3> lengths);

// Fourier coefficients in continuum scaling: coeff = cell_volume * DFT(samples).
struct SpectralField {
    GridPtr grid;
    CVec coeffs;

    SpectralField() = default;
    explicit SpectralField(GridPtr g);
    SpectralField(GridPtr g, CVec c);

    std::size_t size() const { return coeffs.size(); }
    cplx& operator[](std::size_t i) { return coeffs[i]; }
    const cplx& operator[](std::size_t i) const { return coeffs[i]; }

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);
// a + s*b
SpectralField axpy(const SpectralField& a, double s, const SpectralField& b);

void require_same_grid(const SpectralField& a, const SpectralField& b);

SpectralField forward_transform(const GridPtr& grid, const std::vector<double>& samples);
SpectralField forward_transform(const GridPtr& grid, const CVec& samples);
std::vector<double> inverse_transform(const SpectralField& f);
CVec inverse_transform_complex(const SpectralField& f);

SpectralField apply_laplacian(const SpectralField& f);
// multiply by |xi|^(2p) (Nyquist zeroed); p=1 is -Laplacian
SpectralField apply_k2_power(const SpectralField& f, int p);
// i*xi_axis component of the gradient (Nyquist zeroed)
SpectralField apply_gradient(const SpectralField& f, int axis);

// ||grad^j f||_{L2}, j in {0,1,2}
double sobolev_seminorm(const SpectralField& f, int j);
// Re <grad^j a, grad^j b> in L2
double sobolev_inner(const SpectralField& a, const SpectralField& b, int j);
double lp_norm(const SpectralGrid& grid, const std::vector<double>& samples, double p);
double lp_norm(const SpectralField& f, double p);

SpectralField dealias(const SpectralField& f);
SpectralField pointwise_product(const SpectralField& a, const SpectralField& b, bool dealiased = true);

// Hermitian part: (f(xi) + conj f(-xi))/2, makes the represented field real.
SpectralField hermitian_part(const SpectralField& f);
double hermitian_defect(const SpectralField& f);

}  // namespace jmgt
