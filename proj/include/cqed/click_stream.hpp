#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cqed {

enum class ClickChannel : char { C = 'C', X = 'X', D = 'D' };

struct Click {
    double time_ps{};
    ClickChannel channel{};
    bool operator==(const Click&) const = default;
};

/// Time-ordered detector records plus the provenance needed to regenerate them.
struct ClickStream {
    std::vector<Click> clicks;
    double duration_ps = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash = "0000000000000000";

    /// Times of clicks whose channel is in `channels` (e.g. "C", "XC", "CD").
    std::vector<double> times(std::string_view channels) const;
    std::size_t count(ClickChannel c) const;
};

/// Parses "X,C" / "XC" / "C" into a channel set string such as "XC".
std::string parse_channel_set(std::string_view spec);

/// `#cqed-click-v1 seed=<u64> duration_ps=<f> confighash=<hex>` then
/// `channel,time_ps` rows with 0.1 ps resolution.
void write_click_stream(std::ostream& out, const ClickStream& s);
void write_click_stream(const std::string& path, const ClickStream& s);
ClickStream read_click_stream(std::istream& in);
ClickStream read_click_stream(const std::string& path);

/// 64-bit FNV-1a digest as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

/// Rounds to the 0.1 ps file resolution.
double quantize_time(double t_ps);

}  // namespace cqed
