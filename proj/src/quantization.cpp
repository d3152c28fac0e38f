#include "nearq/quantization.hpp"

#include "nearq/error.hpp"
#include "nearq/text_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace nearq {

void UniformQuantizerSpec::validate() const {
    if (!(upper > lower)) throw ConfigError("uniform quantizer needs upper > lower");
    if (base_bits < 1) throw ConfigError("uniform quantizer needs at least 1 base bit");
    if (eta && !(*eta > 0.0 && *eta < 1.0)) throw ConfigError("adaptive rate eta must lie in (0,1)");
}

unsigned UniformQuantizerSpec::extra_bits(std::size_t k) const {
    if (!eta || k == 0) return 0;
    const double bits = std::ceil(static_cast<double>(k) * std::log2(1.0 / *eta));
    // 2^1000 levels is far below double resolution already; cap to keep ldexp finite.
    return static_cast<unsigned>(std::min(bits, 1000.0));
}

double UniformQuantizerSpec::base_spacing() const { return spacing_for_bits(*this, 0); }

double spacing_for_bits(const UniformQuantizerSpec &spec, unsigned extra_bits) {
    const double levels = std::ldexp(1.0, static_cast<int>(spec.base_bits + extra_bits));
    return (spec.upper - spec.lower) / (levels - 1.0);
}

double adaptive_spacing(const UniformQuantizerSpec &spec, std::size_t k) {
    return spacing_for_bits(spec, spec.extra_bits(k));
}

std::size_t quantize_uniform_into(std::span<const double> z, const UniformQuantizerSpec &spec, std::size_t k,
                                  std::span<double> out) {
    if (out.size() != z.size()) throw DimensionError("quantize_uniform: output size mismatch");
    const double l = spec.lower;
    const double u = spec.upper;
    const double width = u - l;
    const double top = std::ldexp(1.0, static_cast<int>(spec.total_bits(k))) - 1.0;    // index of the last level
    // Grid finer than the level arithmetic resolves: values pass through.
    const bool unresolvable =
        width / top < 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(l), std::abs(u));
    std::size_t clamps = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double v = z[i];
        if (v < l || v > u) {
            v = std::clamp(v, l, u);
            ++clamps;
        }
        if (unresolvable) {
            out[i] = v;
            continue;
        }
        // Scale before dividing so grid midpoints stay exact.
        const double r = (v - l) * top / width;
        double m = std::ceil(r - 0.5);    // exact midpoints round down
        m = std::clamp(m, 0.0, top);
        double q;
        if (m == 0.0)
            q = l;
        else if (m == top)
            q = u;
        else
            q = std::clamp(l + m * width / top, l, u);
        out[i] = q;
    }
    return clamps;
}

QuantizedVector quantize_uniform(std::span<const double> z, const UniformQuantizerSpec &spec, std::size_t k) {
    QuantizedVector res;
    res.q.resize(z.size());
    res.clamp_events = quantize_uniform_into(z, spec, k, res.q);
    res.err.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) res.err[i] = res.q[i] - z[i];
    return res;
}

void DigitQuantizerSpec::validate() const {
    if (initial_digits < 1) throw ConfigError("digit quantizer needs at least one significant digit");
    if (period < 1) throw ConfigError("digit quantizer period must be >= 1");
}

unsigned DigitQuantizerSpec::digits(std::size_t k) const {
    return initial_digits + growth * static_cast<unsigned>(k / period);
}

namespace {

constexpr std::array<double, 23> kPow10 = {1e0,  1e1,  1e2,  1e3,  1e4,  1e5,  1e6,  1e7,  1e8,  1e9,  1e10, 1e11,
                                           1e12, 1e13, 1e14, 1e15, 1e16, 1e17, 1e18, 1e19, 1e20, 1e21, 1e22};

// Round value * 10^shift to an integer (half away from zero) and scale back.
// Powers of ten up to 1e22 are exact doubles; beyond that use two steps.
double round_at(double value, int shift) {
    auto scale_up = [](double v, int s) {
        while (s > 22) {
            v *= kPow10[22];
            s -= 22;
        }
        return v * kPow10[static_cast<std::size_t>(s)];
    };
    auto scale_down = [](double v, int s) {
        while (s > 22) {
            v /= kPow10[22];
            s -= 22;
        }
        return v / kPow10[static_cast<std::size_t>(s)];
    };
    if (shift >= 0) return scale_down(std::round(scale_up(value, shift)), shift);
    return scale_up(std::round(scale_down(value, -shift)), -shift);
}

}    // namespace

double round_significant(double value, unsigned digits) {
    if (digits < 1) throw ConfigError("round_significant: digits must be >= 1");
    if (value == 0.0 || !std::isfinite(value) || digits >= 17) return value;
    const double mag = std::abs(value);
    int exponent = static_cast<int>(std::floor(std::log10(mag)));
    // log10 can be off by one ulp near powers of ten.
    if (mag >= std::pow(10.0, exponent + 1)) ++exponent;
    else if (mag < std::pow(10.0, exponent)) --exponent;
    const int shift = static_cast<int>(digits) - 1 - exponent;
    if (shift > 600 || shift < -600) return value;
    const double q = round_at(value, shift);
    return std::isfinite(q) ? q : value;
}

QuantizedVector quantize_digits(std::span<const double> z, unsigned digits) {
    QuantizedVector res;
    res.q.resize(z.size());
    res.err.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        res.q[i] = round_significant(z[i], digits);
        res.err[i] = res.q[i] - z[i];
    }
    return res;
}

QuantizedVector identity_quantizer(std::span<const double> z) {
    QuantizedVector res;
    res.q.assign(z.begin(), z.end());
    res.err.assign(z.size(), 0.0);
    return res;
}

std::size_t apply_quantizer(const Quantizer &quantizer, std::span<const double> z, std::size_t k,
                            std::span<double> out) {
    if (out.size() != z.size()) throw DimensionError("apply_quantizer: output size mismatch");
    return std::visit(
        [&](const auto &qz) -> std::size_t {
            using T = std::decay_t<decltype(qz)>;
            if constexpr (std::is_same_v<T, IdentityQuantizer>) {
                std::copy(z.begin(), z.end(), out.begin());
                return 0;
            } else if constexpr (std::is_same_v<T, UniformQuantizerSpec>) {
                return quantize_uniform_into(z, qz, k, out);
            } else {
                const unsigned d = qz.digits(k);
                for (std::size_t i = 0; i < z.size(); ++i) out[i] = round_significant(z[i], d);
                return 0;
            }
        },
        quantizer);
}

unsigned symbols_per_coordinate(const Quantizer &quantizer, std::size_t k) {
    return std::visit(
        [&](const auto &qz) -> unsigned {
            using T = std::decay_t<decltype(qz)>;
            if constexpr (std::is_same_v<T, IdentityQuantizer>)
                return qz.full_precision_digits;
            else if constexpr (std::is_same_v<T, UniformQuantizerSpec>)
                return qz.total_bits(k);
            else
                return qz.digits(k);
        },
        quantizer);
}

std::string describe(const Quantizer &quantizer) {
    return std::visit(
        [](const auto &qz) -> std::string {
            using T = std::decay_t<decltype(qz)>;
            if constexpr (std::is_same_v<T, IdentityQuantizer>) {
                return "identity";
            } else if constexpr (std::is_same_v<T, UniformQuantizerSpec>) {
                std::string s = "uniform[" + text_io::format_double(qz.lower) + "," + text_io::format_double(qz.upper) +
                                "] b0=" + std::to_string(qz.base_bits);
                if (qz.eta) s += " eta=" + text_io::format_double(*qz.eta);
                return s;
            } else if (qz.growth == 0) {
                return "Q(" + std::to_string(qz.initial_digits) + ",-,-)";
            } else {
                return "Q(" + std::to_string(qz.initial_digits) + "," + std::to_string(qz.growth) + "," +
                       std::to_string(qz.period) + ")";
            }
        },
        quantizer);
}

}    // namespace nearq
