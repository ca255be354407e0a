#include "cqed/click_stream.hpp"

#include "cqed/errors.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace cqed {

std::vector<double> ClickStream::times(std::string_view channels) const
{
    std::vector<double> out;
    for (const auto& c : clicks)
        if (channels.find(static_cast<char>(c.channel)) != std::string_view::npos)
            out.push_back(c.time_ps);
    return out;
}

std::size_t ClickStream::count(ClickChannel ch) const
{
    std::size_t n = 0;
    for (const auto& c : clicks)
        n += c.channel == ch ? 1 : 0;
    return n;
}

std::string parse_channel_set(std::string_view spec)
{
    std::string out;
    for (char c : spec) {
        if (c == ',' || c == ' ')
            continue;
        if (c != 'C' && c != 'X' && c != 'D')
            throw ConfigError(std::string("unknown channel '") + c + "' (expected C, X or D)");
        if (out.find(c) == std::string::npos)
            out.push_back(c);
    }
    if (out.empty())
        throw ConfigError("empty channel set");
    return out;
}

double quantize_time(double t_ps)
{
    return std::round(t_ps * 10.0) / 10.0;
}

std::string fnv1a_hex(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

void write_click_stream(std::ostream& out, const ClickStream& s)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "#cqed-click-v1 seed=%" PRIu64 " duration_ps=%.1f confighash=%s\n", s.seed,
                  s.duration_ps, s.config_hash.c_str());
    out << buf << "channel,time_ps\n";
    for (const auto& c : s.clicks) {
        std::snprintf(buf, sizeof buf, "%c,%.1f\n", static_cast<char>(c.channel), c.time_ps);
        out << buf;
    }
}

void write_click_stream(const std::string& path, const ClickStream& s)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write " + path);
    write_click_stream(out, s);
}

ClickStream read_click_stream(std::istream& in)
{
    ClickStream s;
    std::string line;
    if (!std::getline(in, line) || line.rfind("#cqed-click-v1", 0) != 0)
        throw ConfigError("click stream: missing '#cqed-click-v1' header");
    {
        std::istringstream hs(line.substr(14));
        std::string tok;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw ConfigError("click stream: malformed header field '" + tok + "'");
            const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
            if (key == "seed")
                s.seed = std::stoull(value);
            else if (key == "duration_ps")
                s.duration_ps = std::stod(value);
            else if (key == "confighash")
                s.config_hash = value;
            else
                throw ConfigError("click stream: unknown header field '" + key + "'");
        }
    }
    if (!std::getline(in, line) || (line != "channel,time_ps" && line != "channel,time_ps\r"))
        throw ConfigError("click stream: expected 'channel,time_ps' column header");
    double last = -INFINITY;
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line.size() < 3 || line[1] != ',')
            throw ConfigError("click stream: malformed row at line " + std::to_string(lineno));
        const char ch = line[0];
        if (ch != 'C' && ch != 'X' && ch != 'D')
            throw ConfigError("click stream: bad channel at line " + std::to_string(lineno));
        double t = 0.0;
        try {
            t = std::stod(line.substr(2));
        } catch (const std::exception&) {
            throw ConfigError("click stream: bad time at line " + std::to_string(lineno));
        }
        if (t < last)
            throw ConfigError("click stream: times decrease at line " + std::to_string(lineno));
        last = t;
        s.clicks.push_back({t, static_cast<ClickChannel>(ch)});
    }
    return s;
}

ClickStream read_click_stream(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open click stream " + path);
    return read_click_stream(in);
}

}  // namespace cqed
