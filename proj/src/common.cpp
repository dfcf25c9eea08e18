#include "ihgnn/error.hpp"
#include "ihgnn/log.hpp"
#include "ihgnn/numfmt.hpp"
#include "ihgnn/rng.hpp"

#include <atomic>
#include <charconv>
#include <iostream>
#include <mutex>
#include <string>

namespace ihgnn {

namespace log {
namespace {
std::atomic<Level> g_level{Level::info};
std::mutex g_mutex;

void emit(Level lvl, const char* tag, std::string_view msg) {
    if (lvl < g_level.load()) return;
    std::lock_guard lock(g_mutex);
    std::cerr << "[ihgnn " << tag << "] " << msg << '\n';
}
} // namespace

void set_level(Level lvl) { g_level.store(lvl); }
Level level() { return g_level.load(); }
void debug(std::string_view msg) { emit(Level::debug, "debug", msg); }
void info(std::string_view msg) { emit(Level::info, "info", msg); }
void warn(std::string_view msg) { emit(Level::warn, "warn", msg); }
void error(std::string_view msg) { emit(Level::error, "error", msg); }
} // namespace log

Rng substream(std::uint64_t seed, std::string_view purpose) {
    // FNV-1a over the purpose label keeps substreams stable across builds.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : purpose) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
    double v = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw ValidationError("not a number: '" + std::string(token) + "'");
    return v;
}

long long parse_int(std::string_view token) {
    long long v = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw ValidationError("not an integer: '" + std::string(token) + "'");
    return v;
}

} // namespace ihgnn
