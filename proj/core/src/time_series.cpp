#include "windcast/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace windcast {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Howard Hinnant's days-from-civil; valid over the whole proleptic Gregorian range.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u + static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yy + (m <= 2));
}

double parse_cell(const std::string& cell) {
  if (cell.empty()) return kNan;
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
    return pos == cell.size() ? v : kNan;
  } catch (const std::exception&) {
    return kNan;
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

std::string role_name(ChannelRole role) {
  switch (role) {
    case ChannelRole::InSitu: return "insitu";
    case ChannelRole::NWP: return "nwp";
    case ChannelRole::Target: return "target";
  }
  throw std::logic_error("role_name: unknown role");
}

ChannelRole role_from_name(const std::string& name) {
  if (name == "insitu") return ChannelRole::InSitu;
  if (name == "nwp") return ChannelRole::NWP;
  if (name == "target") return ChannelRole::Target;
  throw std::invalid_argument("unknown channel role: " + name);
}

std::ptrdiff_t TimeSeriesFrame::length() const {
  return channels.empty() ? 0 : static_cast<std::ptrdiff_t>(channels.front().values.size());
}

const Channel* TimeSeriesFrame::find(const std::string& name) const {
  for (const auto& c : channels)
    if (c.name == name) return &c;
  return nullptr;
}

Channel* TimeSeriesFrame::find(const std::string& name) {
  for (auto& c : channels)
    if (c.name == name) return &c;
  return nullptr;
}

void TimeSeriesFrame::validate() const {
  if (cadence <= 0) throw std::invalid_argument("frame cadence must be positive");
  const auto n = length();
  for (const auto& c : channels) {
    if (static_cast<std::ptrdiff_t>(c.values.size()) != n)
      throw std::invalid_argument("channel '" + c.name + "' length differs from frame length");
  }
  for (std::size_t i = 0; i < channels.size(); ++i)
    for (std::size_t j = i + 1; j < channels.size(); ++j)
      if (channels[i].name == channels[j].name)
        throw std::invalid_argument("duplicate channel name: " + channels[i].name);
}

std::int64_t parse_timestamp(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  int consumed = 0;
  const int got = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d%n", &y, &mo, &d, &sep, &h, &mi, &s, &consumed);
  if (got < 6 || (sep != 'T' && sep != ' '))
    throw std::invalid_argument("unparseable timestamp: " + text);
  if (got == 6) s = 0;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60)
    throw std::invalid_argument("timestamp out of range: " + text);
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(std::int64_t unix_seconds) {
  std::int64_t days = unix_seconds / 86400;
  std::int64_t rem = unix_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
  return buf;
}

TimeSeriesFrame ingest_csv(const std::string& path, const std::map<std::string, ChannelRole>& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  const auto header = split_csv_line(line);
  if (header.empty() || header.front() != "timestamp")
    throw std::invalid_argument(path + ": first column must be 'timestamp'");

  std::vector<Channel> channels;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto it = schema.find(header[c]);
    if (it == schema.end())
      throw std::invalid_argument(path + ": channel '" + header[c] + "' not declared in schema");
    channels.push_back(Channel{header[c], it->second, "", {}});
  }

  std::vector<std::int64_t> stamps;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path + ": row with " + std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
    stamps.push_back(parse_timestamp(cells[0]));
    std::vector<double> row(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c) row[c] = parse_cell(cells[c + 1]);
    rows.push_back(std::move(row));
  }
  if (stamps.size() < 2) throw std::runtime_error(path + ": need at least two rows to infer cadence");
  for (std::size_t i = 1; i < stamps.size(); ++i) {
    if (stamps[i] == stamps[i - 1]) throw std::invalid_argument(path + ": duplicate timestamp " + format_timestamp(stamps[i]));
    if (stamps[i] < stamps[i - 1]) throw std::invalid_argument(path + ": timestamps not increasing at " + format_timestamp(stamps[i]));
  }

  std::int64_t cadence = 0;
  for (std::size_t i = 1; i < stamps.size(); ++i) cadence = std::gcd(cadence, stamps[i] - stamps[i - 1]);

  TimeSeriesFrame frame;
  frame.start_time = stamps.front();
  frame.cadence = cadence;
  frame.channels = std::move(channels);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>((stamps.back() - stamps.front()) / cadence) + 1;
  for (auto& c : frame.channels) c.values.assign(static_cast<std::size_t>(n), kNan);
  for (std::size_t r = 0; r < stamps.size(); ++r) {
    const auto idx = static_cast<std::size_t>((stamps[r] - frame.start_time) / cadence);
    for (std::size_t c = 0; c < frame.channels.size(); ++c) frame.channels[c].values[idx] = rows[r][c];
  }
  frame.validate();
  return frame;
}

TimeSeriesFrame resample_linear(const TimeSeriesFrame& frame, std::int64_t target_cadence) {
  frame.validate();
  if (target_cadence <= 0 || frame.cadence % target_cadence != 0)
    throw std::invalid_argument("target cadence must divide the source cadence");
  const std::int64_t ratio = frame.cadence / target_cadence;
  const std::ptrdiff_t n = frame.length();
  if (n == 0 || ratio == 1) {
    TimeSeriesFrame copy = frame;
    copy.cadence = target_cadence;
    return copy;
  }
  const std::ptrdiff_t m = (n - 1) * ratio + 1;

  TimeSeriesFrame out;
  out.start_time = frame.start_time;
  out.cadence = target_cadence;
  for (const auto& ch : frame.channels) {
    Channel oc{ch.name, ch.role, ch.unit, std::vector<double>(static_cast<std::size_t>(m), kNan)};
    for (std::ptrdiff_t i = 0; i < n; ++i) oc.values[static_cast<std::size_t>(i * ratio)] = ch.values[static_cast<std::size_t>(i)];
    if (ch.role == ChannelRole::NWP) {
      for (std::ptrdiff_t i = 0; i + 1 < n; ++i) {
        const double a = ch.values[static_cast<std::size_t>(i)];
        const double b = ch.values[static_cast<std::size_t>(i + 1)];
        if (std::isnan(a) || std::isnan(b)) continue;  // stays missing next to a hole
        for (std::int64_t s = 1; s < ratio; ++s) {
          const double w = static_cast<double>(s) / static_cast<double>(ratio);
          oc.values[static_cast<std::size_t>(i * ratio + s)] = (1.0 - w) * a + w * b;
        }
      }
    }
    out.channels.push_back(std::move(oc));
  }
  return out;
}

TimeSeriesFrame encode_direction(const TimeSeriesFrame& frame, const std::string& channel) {
  frame.validate();
  TimeSeriesFrame out;
  out.start_time = frame.start_time;
  out.cadence = frame.cadence;
  bool found = false;
  for (const auto& ch : frame.channels) {
    if (ch.name != channel) {
      out.channels.push_back(ch);
      continue;
    }
    found = true;
    Channel sc{ch.name + "_sin", ch.role, "", {}};
    Channel cc{ch.name + "_cos", ch.role, "", {}};
    sc.values.reserve(ch.values.size());
    cc.values.reserve(ch.values.size());
    constexpr double deg = 3.14159265358979323846 / 180.0;
    for (double v : ch.values) {
      if (std::isnan(v)) {
        sc.values.push_back(kNan);
        cc.values.push_back(kNan);
      } else {
        sc.values.push_back(std::sin(v * deg));
        cc.values.push_back(std::cos(v * deg));
      }
    }
    out.channels.push_back(std::move(sc));
    out.channels.push_back(std::move(cc));
  }
  if (!found) throw std::invalid_argument("encode_direction: no channel named " + channel);
  return out;
}

TimeSeriesFrame average_turbines(const std::vector<TimeSeriesFrame>& frames) {
  if (frames.empty()) throw std::invalid_argument("average_turbines: no frames");
  const auto& first = frames.front();
  first.validate();
  for (const auto& f : frames) {
    f.validate();
    if (f.start_time != first.start_time || f.cadence != first.cadence || f.length() != first.length())
      throw std::invalid_argument("average_turbines: frames do not share a time grid");
    if (f.channels.size() != first.channels.size())
      throw std::invalid_argument("average_turbines: frames do not share channels");
    for (std::size_t c = 0; c < f.channels.size(); ++c)
      if (f.channels[c].name != first.channels[c].name || f.channels[c].role != first.channels[c].role)
        throw std::invalid_argument("average_turbines: channel mismatch at position " + std::to_string(c));
  }

  TimeSeriesFrame out = first;
  const double inv = 1.0 / static_cast<double>(frames.size());
  for (std::size_t c = 0; c < out.channels.size(); ++c) {
    auto& vals = out.channels[c].values;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      double sum = 0.0;
      for (const auto& f : frames) sum += f.channels[c].values[i];
      vals[i] = sum * inv;  // NaN from any turbine propagates
    }
  }
  return out;
}

TimeSeriesFrame merge_frames(const TimeSeriesFrame& a, const TimeSeriesFrame& b) {
  a.validate();
  b.validate();
  if (a.cadence != b.cadence) throw std::invalid_argument("merge_frames: cadences differ");
  if ((a.start_time - b.start_time) % a.cadence != 0)
    throw std::invalid_argument("merge_frames: time grids are not aligned");
  for (const auto& ch : b.channels)
    if (a.find(ch.name) != nullptr) throw std::invalid_argument("merge_frames: duplicate channel " + ch.name);

  const std::int64_t begin = std::max(a.start_time, b.start_time);
  const std::int64_t a_end = a.start_time + a.cadence * (a.length() - 1);
  const std::int64_t b_end = b.start_time + b.cadence * (b.length() - 1);
  const std::int64_t end = std::min(a_end, b_end);
  if (end < begin) throw std::invalid_argument("merge_frames: frames do not overlap in time");
  const auto n = static_cast<std::ptrdiff_t>((end - begin) / a.cadence) + 1;

  TimeSeriesFrame out;
  out.start_time = begin;
  out.cadence = a.cadence;
  const auto slice = [&](const TimeSeriesFrame& src) {
    const auto offset = static_cast<std::ptrdiff_t>((begin - src.start_time) / src.cadence);
    for (const auto& ch : src.channels) {
      Channel oc{ch.name, ch.role, ch.unit, {}};
      oc.values.assign(ch.values.begin() + offset, ch.values.begin() + offset + n);
      out.channels.push_back(std::move(oc));
    }
  };
  slice(a);
  slice(b);
  return out;
}

std::string frame_to_csv(const TimeSeriesFrame& frame) {
  frame.validate();
  std::string text = "timestamp";
  for (const auto& ch : frame.channels) text += "," + ch.name;
  text += "\n";
  char buf[40];
  for (std::ptrdiff_t i = 0; i < frame.length(); ++i) {
    text += format_timestamp(frame.start_time + frame.cadence * i);
    for (const auto& ch : frame.channels) {
      text += ',';
      const double v = ch.values[static_cast<std::size_t>(i)];
      if (std::isfinite(v)) {
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        text.append(buf, r.ptr);
      }
    }
    text += '\n';
  }
  return text;
}

}  // namespace windcast
