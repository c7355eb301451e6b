#include "jmgt/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace jmgt {

namespace {

constexpr char kMagic[6] = {'J', 'M', 'G', 'T', '1', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    std::vector<std::uint8_t> buf;

    template <class T>
    void put(T v) {
        std::uint8_t b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        buf.insert(buf.end(), b, b + sizeof(T));
    }
    void u32(std::uint32_t v) { put(v); }
    void u64(std::uint64_t v) { put(v); }
    void f64(double v) { put(v); }
    void coeffs(const CVec& c) {
        for (const auto& z : c) {
            f64(z.real());
            f64(z.imag());
        }
    }
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : buf_(b) {}

    template <class T>
    T get() {
        if (pos_ + sizeof(T) > buf_.size())
            throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
        std::uint8_t b[sizeof(T)];
        std::memcpy(b, buf_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    double f64() { return get<double>(); }
    SpectralField field(const GridPtr& g) {
        SpectralField f(g);
        for (auto& z : f.coeffs) {
            const double re = f64();
            const double im = f64();
            z = cplx(re, im);
        }
        return f;
    }
    void bytes(char* out, std::size_t n) {
        if (pos_ + n > buf_.size()) throw CheckpointError("checkpoint truncated in header");
        std::memcpy(out, buf_.data() + pos_, n);
        pos_ += n;
    }
    bool at_end() const { return pos_ == buf_.size(); }

private:
    const std::vector<std::uint8_t>& buf_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const StateVector& s, const PhysicalParams& p) {
    const SpectralGrid& g = *s.grid();
    Writer w;
    w.buf.insert(w.buf.end(), kMagic, kMagic + 6);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(g.dim()));
    w.u32(static_cast<std::uint32_t>(g.points()));
    for (int a = 0; a < g.dim(); ++a) w.f64(g.length(a));

    w.f64(p.tau);
    w.f64(p.alpha);
    w.f64(p.c);
    w.f64(p.delta);
    w.f64(p.b);
    w.f64(p.k);
    w.f64(p.rho);
    w.f64(p.kernel.m);
    w.f64(p.kernel.c);
    w.f64(p.kernel.tau_k);
    w.f64(p.kernel.zeta);
    w.u32(p.allow_non_subcritical ? 1u : 0u);

    w.f64(s.t);
    w.coeffs(s.psi.coeffs);
    w.coeffs(s.v.coeffs);
    w.coeffs(s.w.coeffs);

    const HistoryField& h = s.history;
    w.u32(static_cast<std::uint32_t>(h.length()));
    for (const auto& snap : h.ring()) w.coeffs(snap.coeffs);

    w.f64(h.dt());
    w.u64(h.capacity());
    w.u64(h.steps());
    w.f64(h.t_elapsed());
    const bool has_init = h.psi_init().grid != nullptr;
    w.u32(has_init ? 1u : 0u);
    if (has_init) w.coeffs(h.psi_init().coeffs);
    w.u64(s.step_count);
    w.u32(s.closed ? 1u : 0u);
    if (s.closed) {
        w.coeffs(s.closed->moment);
        for (double q : s.closed->energy) w.f64(q);
    }
    return std::move(w.buf);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    char magic[6];
    r.bytes(magic, 6);
    if (std::memcmp(magic, kMagic, 6) != 0) throw CheckpointError("not a JMGT1 checkpoint (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t dim = r.u32();
    const std::uint32_t points = r.u32();
    if (dim < 1 || dim > 3) throw CheckpointError("checkpoint: invalid dimension " + std::to_string(dim));
    if (points < 2 || points > (1u << 16)) throw CheckpointError("checkpoint: invalid point count");
    std::array<double, 3> L{1.0, 1.0, 1.0};
    for (std::uint32_t a = 0; a < dim; ++a) L[a] = r.f64();
    for (std::uint32_t a = dim; a < 3; ++a) L[a] = L[0];
    GridPtr grid;
    try {
        grid = make_grid(static_cast<int>(dim), static_cast<int>(points), L);
    } catch (const GridError& e) {
        throw CheckpointError(std::string("checkpoint: ") + e.what());
    }

    Checkpoint out;
    PhysicalParams& p = out.params;
    p.tau = r.f64();
    p.alpha = r.f64();
    p.c = r.f64();
    p.delta = r.f64();
    p.b = r.f64();
    p.k = r.f64();
    p.rho = r.f64();
    p.kernel.m = r.f64();
    p.kernel.c = r.f64();
    p.kernel.tau_k = r.f64();
    p.kernel.zeta = r.f64();
    p.allow_non_subcritical = r.u32() != 0;

    StateVector& s = out.state;
    s.t = r.f64();
    s.psi = r.field(grid);
    s.v = r.field(grid);
    s.w = r.field(grid);

    const std::uint32_t ring_len = r.u32();
    std::deque<SpectralField> ring;
    for (std::uint32_t j = 0; j < ring_len; ++j) ring.push_back(r.field(grid));

    const double hdt = r.f64();
    const std::uint64_t capacity = r.u64();
    const std::uint64_t steps = r.u64();
    const double t_elapsed = r.f64();
    SpectralField psi_init;
    if (r.u32() != 0) psi_init = r.field(grid);
    else psi_init = SpectralField(grid);
    s.history.restore(hdt, capacity, steps, t_elapsed, std::move(psi_init), std::move(ring));
    s.step_count = r.u64();
    if (r.u32() != 0) {
        ClosedMemory cm;
        cm.moment = r.field(grid).coeffs;
        cm.energy.resize(grid->size());
        for (auto& q : cm.energy) q = r.f64();
        s.closed = std::move(cm);
    }
    if (!r.at_end()) throw CheckpointError("checkpoint: trailing bytes after payload");
    return out;
}

void write_checkpoint(const std::string& path, const StateVector& s, const PhysicalParams& p) {
    const auto bytes = encode_checkpoint(s, p);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot write checkpoint '" + path + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw CheckpointError("write failed for '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot open checkpoint '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace jmgt
