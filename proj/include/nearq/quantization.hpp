#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace nearq {

/// Uniform quantizer on [lower, upper] with 2^base_bits levels at k = 0.
///
/// With an adaptive rate eta in (0,1), iteration k transmits
/// extra_bits(k) = ceil(k * log2(1/eta)) additional bits, so the level
/// spacing satisfies spacing(k) <= 0.5^extra_bits(k) * spacing(0) <= eta^k * spacing(0).
struct UniformQuantizerSpec {
    double lower = 0.0;
    double upper = 1.0;
    unsigned base_bits = 1;
    std::optional<double> eta;

    void validate() const;
    unsigned extra_bits(std::size_t k) const;
    unsigned total_bits(std::size_t k) const { return base_bits + extra_bits(k); }
    /// Spacing of the base grid, (u - l) / (2^b0 - 1).
    double base_spacing() const;
};

/// Spacing when `extra_bits` bits are added on top of the base budget.
double spacing_for_bits(const UniformQuantizerSpec &spec, unsigned extra_bits);

/// Level spacing in effect at iteration k.
double adaptive_spacing(const UniformQuantizerSpec &spec, std::size_t k);

/// Significant-decimal-digit quantizer: digits(k) = initial + growth * floor(k / period).
struct DigitQuantizerSpec {
    unsigned initial_digits = 1;
    unsigned growth = 0;
    std::size_t period = 1;

    static DigitQuantizerSpec fixed(unsigned digits) { return {digits, 0, 1}; }

    void validate() const;
    unsigned digits(std::size_t k) const;
    bool adaptive() const noexcept { return growth > 0; }
};

/// Exact pass-through. Transmissions are still counted, at `full_precision_digits` per coordinate.
struct IdentityQuantizer {
    unsigned full_precision_digits = 16;
};

using Quantizer = std::variant<IdentityQuantizer, UniformQuantizerSpec, DigitQuantizerSpec>;

struct QuantizedVector {
    std::vector<double> q;
    std::vector<double> err;    // q - z
    std::size_t clamp_events = 0;
};

/// Nearest level of the iteration-k grid; ties go to the lower level; inputs outside
/// [lower, upper] are clamped first and counted. Grids finer than 64 ulps of the interval
/// ends pass values through unchanged. Returns the number of clamp events.
std::size_t quantize_uniform_into(std::span<const double> z, const UniformQuantizerSpec &spec, std::size_t k,
                                  std::span<double> out);
QuantizedVector quantize_uniform(std::span<const double> z, const UniformQuantizerSpec &spec, std::size_t k);

/// Rounds one value to `digits` significant decimal digits, half away from zero.
double round_significant(double value, unsigned digits);
QuantizedVector quantize_digits(std::span<const double> z, unsigned digits);

QuantizedVector identity_quantizer(std::span<const double> z);

/// Dispatches on the quantizer kind; returns clamp events (always 0 except uniform).
std::size_t apply_quantizer(const Quantizer &quantizer, std::span<const double> z, std::size_t k,
                            std::span<double> out);

/// Transmitted symbols per coordinate at iteration k: bits (uniform), decimal digits
/// (digit quantizer) or the configured full-precision digit count (identity).
unsigned symbols_per_coordinate(const Quantizer &quantizer, std::size_t k);

std::string describe(const Quantizer &quantizer);

/// Which transmissions count as one message in a consensus round.
enum class MessageModel {
    directed_edges,    // every agent sends its vector to each neighbour: 2|E| messages per round
    node_broadcast,    // one broadcast per agent: n messages per round
};

struct TransmissionCounter {
    std::uint64_t digits_sent = 0;
    std::uint64_t messages = 0;

    /// One quantized consensus round: `messages` vectors of length p, `symbols` per coordinate.
    void record_round(std::uint64_t round_messages, std::size_t p, unsigned symbols) {
        messages += round_messages;
        digits_sent += round_messages * static_cast<std::uint64_t>(p) * symbols;
    }
};

}    // namespace nearq
