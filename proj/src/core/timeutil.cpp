#include "sprobe/timeutil.hpp"

#include <chrono>
#include <cstdio>
#include <string>

#include "sprobe/error.hpp"

namespace sprobe {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace

UnixSeconds parse_iso8601(std::string_view text) {
    using namespace std::chrono;
    auto fail = [&]() -> UnixSeconds {
        throw FormatError("invalid ISO-8601 timestamp '" + std::string(text) + "'");
    };
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!read_int(text, 0, 4, y) || text.size() < 16 || text[4] != '-' || !read_int(text, 5, 2, mo) ||
        text[7] != '-' || !read_int(text, 8, 2, d) || (text[10] != 'T' && text[10] != ' ') ||
        !read_int(text, 11, 2, h) || text[13] != ':' || !read_int(text, 14, 2, mi))
        return fail();
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        if (!read_int(text, pos + 1, 2, s)) return fail();
        pos += 3;
    }
    if (pos < text.size() && text[pos] == 'Z') ++pos;
    if (pos != text.size()) return fail();
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return fail();
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<UnixSeconds>(days) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(UnixSeconds t) {
    using namespace std::chrono;
    const auto dp = floor<days>(sys_seconds{seconds{t}});
    const year_month_day ymd{dp};
    const auto rem = t - static_cast<UnixSeconds>(dp.time_since_epoch().count()) * 86400;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60));
    return buf;
}

bool on_three_hour_grid(UnixSeconds t) {
    const UnixSeconds m = ((t % kThreeHours) + kThreeHours) % kThreeHours;
    return m == 0;
}

}  // namespace sprobe
