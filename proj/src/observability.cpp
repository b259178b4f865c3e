#include "grushin/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "grushin/csv.hpp"
#include "grushin/fft.hpp"
#include "grushin/parallel.hpp"

namespace grushin::observe {

namespace {

constexpr double kTwoPi = field::kTwoPi;
constexpr double kFullTol = 1e-12;
constexpr std::size_t kNodeChunk = 512;

double wrap(double y) {
    double r = std::fmod(y, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r -= kTwoPi;
    return r;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

ControlRegion::ControlRegion(const std::vector<std::pair<double, double>>& arcs) {
    for (const auto& [c, d] : arcs) {
        double len = d - c;
        if (!(len > 0.0)) throw std::invalid_argument("ControlRegion: arc needs c < d");
        if (len > kTwoPi + kFullTol) throw std::invalid_argument("ControlRegion: arc longer than the torus");
        arcs_.push_back({wrap(c), std::min(len, kTwoPi)});
    }
    std::sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
        const Arc& a = arcs_[i];
        double next_start = (i + 1 < arcs_.size()) ? arcs_[i + 1].start : arcs_.front().start + kTwoPi;
        if (arcs_.size() == 1) {
            if (a.length > kTwoPi + kFullTol) throw std::invalid_argument("ControlRegion: arc overlaps itself");
            continue;
        }
        if (a.start + a.length > next_start + kFullTol) throw std::invalid_argument("ControlRegion: arcs overlap");
    }
}

ControlRegion ControlRegion::full_torus() { return ControlRegion({{0.0, kTwoPi}}); }

ControlRegion ControlRegion::strip_complement(double a) {
    if (!(a > 0.0) || !(a < std::numbers::pi)) throw std::invalid_argument("strip_complement: need 0 < a < pi");
    return ControlRegion({{a, kTwoPi - a}});
}

double ControlRegion::total_length() const {
    double s = 0.0;
    for (const auto& a : arcs_) s += a.length;
    return s;
}

bool ControlRegion::is_full() const { return std::abs(total_length() - kTwoPi) <= 1e-9; }

ControlRegion ControlRegion::rotated(double angle) const {
    std::vector<std::pair<double, double>> shifted;
    for (const auto& a : arcs_) shifted.emplace_back(a.start + angle, a.start + angle + a.length);
    return ControlRegion(shifted);
}

std::string ControlRegion::describe() const {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
        if (i) out << ';';
        out << '(' << arcs_[i].start << ':' << arcs_[i].start + arcs_[i].length << ')';
    }
    return out.str();
}

double gap_length(const ControlRegion& region) {
    const auto& arcs = region.arcs();
    if (arcs.empty()) return kTwoPi;
    double best = 0.0;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        double end = arcs[i].start + arcs[i].length;
        double next = (i + 1 < arcs.size()) ? arcs[i + 1].start : arcs.front().start + kTwoPi;
        best = std::max(best, next - end);
    }
    return std::max(best, 0.0);
}

cplx arc_fourier(const ControlRegion& region, int k) {
    if (k == 0) return {region.total_length(), 0.0};
    cplx acc{};
    const double kk = k;
    for (const auto& a : region.arcs()) {
        double c = a.start, d = a.start + a.length;
        acc += std::polar(1.0, -kk * c) - std::polar(1.0, -kk * d);
    }
    return acc / cplx(0.0, kk);
}

double region_mass(const field::GridField& g, const ControlRegion& region) {
    const auto& modes = g.modes();
    if (modes.empty()) return 0.0;
    const int nmin = modes.front();
    const std::size_t K = static_cast<std::size_t>(modes.back() - nmin + 1);
    const std::size_t L = next_pow2(2 * K);
    const std::size_t M = static_cast<std::size_t>(g.interior());

    // kernel[d mod L] = \hat I(-d), |d| < K
    std::vector<cplx> kernel(L, cplx{});
    for (long d = -static_cast<long>(K) + 1; d < static_cast<long>(K); ++d) {
        kernel[(d + static_cast<long>(L)) % static_cast<long>(L)] = arc_fourier(region, static_cast<int>(-d));
    }
    fft::forward(kernel);

    std::vector<std::size_t> slot(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k) slot[k] = static_cast<std::size_t>(modes[k] - nmin);

    double total = 0.0;
    std::vector<cplx> buf;
    for (std::size_t i0 = 0; i0 < M; i0 += kNodeChunk) {
        const std::size_t chunk = std::min(kNodeChunk, M - i0);
        buf.assign(chunk * L, cplx{});
        for (std::size_t k = 0; k < modes.size(); ++k) {
            auto vals = g.mode_values(k);
            for (std::size_t r = 0; r < chunk; ++r) buf[r * L + slot[k]] = std::conj(vals[i0 + r]);
        }
        fft::forward_batch(buf, static_cast<int>(L), static_cast<int>(chunk));
        for (std::size_t r = 0; r < chunk; ++r) {
            for (std::size_t j = 0; j < L; ++j) buf[r * L + j] *= kernel[j];
        }
        fft::backward_batch(buf, static_cast<int>(L), static_cast<int>(chunk));
        for (std::size_t k = 0; k < modes.size(); ++k) {
            auto vals = g.mode_values(k);
            for (std::size_t r = 0; r < chunk; ++r) total += (vals[i0 + r] * buf[r * L + slot[k]]).real();
        }
    }
    return total * g.grid().spacing() / static_cast<double>(L);
}

double region_mass_direct(const field::GridField& g, const ControlRegion& region) {
    const auto& modes = g.modes();
    const std::size_t M = static_cast<std::size_t>(g.interior());
    double total = 0.0;
    for (std::size_t a = 0; a < modes.size(); ++a) {
        for (std::size_t b = 0; b < modes.size(); ++b) {
            cplx w = arc_fourier(region, modes[b] - modes[a]);
            auto ua = g.mode_values(a);
            auto ub = g.mode_values(b);
            cplx overlap{};
            for (std::size_t i = 0; i < M; ++i) overlap += ua[i] * std::conj(ub[i]);
            total += (w * overlap).real();
        }
    }
    return total * g.grid().spacing();
}

std::vector<double> simpson_weights(int nt, double a, double b) {
    if (nt < 3 || nt % 2 == 0) throw std::invalid_argument("simpson_weights: nt must be odd and >= 3");
    const double step = (b - a) / (nt - 1);
    std::vector<double> w(nt);
    for (int j = 0; j < nt; ++j) {
        double c = (j == 0 || j == nt - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        w[j] = c * step / 3.0;
    }
    return w;
}

double observed_fraction(const field::ModalField& u0, const ControlRegion& region, double T, int nt, int threads) {
    if (!(T > 0.0)) throw std::invalid_argument("observed_fraction: T must be positive");
    if (nt < 33 || nt % 2 == 0) {
        throw std::invalid_argument("observed_fraction: nt must be odd and >= 33, got " + std::to_string(nt));
    }
    const double total = field::mass(u0);
    if (!(total > 0.0)) throw std::invalid_argument("observed_fraction: initial state has zero mass");
    const auto weights = simpson_weights(nt, -T, T);
    std::vector<double> samples(nt);
    parallel_for(static_cast<std::size_t>(nt), threads, [&](std::size_t j) {
        double t = -T + 2.0 * T * static_cast<double>(j) / (nt - 1);
        samples[j] = region_mass(field::synthesize(field::evolve(u0, t)), region);
    });
    double integral = 0.0;
    for (int j = 0; j < nt; ++j) integral += weights[j] * samples[j];
    return integral / (2.0 * T * total);
}

std::vector<double> ObservabilityReport::fractions_at(double T) const {
    std::vector<double> out;
    for (const auto& c : cells) {
        if (c.T == T) out.push_back(c.fraction);
    }
    return out;
}

bool ObservabilityReport::strictly_decreasing_at(double T) const {
    auto f = fractions_at(T);
    for (std::size_t i = 1; i < f.size(); ++i) {
        if (!(f[i] < f[i - 1])) return false;
    }
    return !f.empty();
}

double ObservabilityReport::min_fraction_at(double T) const {
    auto f = fractions_at(T);
    if (f.empty()) return std::numeric_limits<double>::quiet_NaN();
    return *std::min_element(f.begin(), f.end());
}

std::string ObservabilityReport::to_csv() const {
    csv::Writer w{"h", "T", "a", "L_omega", "nt", "observed_fraction"};
    for (const auto& c : cells) w.row(c.h, c.T, a, L_omega, nt, c.fraction);
    return w.str();
}

ObservabilityReport threshold_sweep(const std::vector<BeamMember>& family, const ControlRegion& region,
                                    const std::vector<double>& T_list, int nt, int threads) {
    if (family.empty()) throw std::invalid_argument("threshold_sweep: empty beam family");
    ObservabilityReport report;
    report.region = region.describe();
    report.L_omega = gap_length(region);
    report.a = 0.5 * report.L_omega;
    report.nt = nt;
    for (const auto& member : family) {
        for (double T : T_list) {
            report.cells.push_back({member.h, T, observed_fraction(member.field, region, T, nt, threads)});
        }
    }
    return report;
}

}  // namespace grushin::observe
