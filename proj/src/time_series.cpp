#include "transwave/time_series.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "transwave/error.hpp"

namespace transwave {

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::Delta: return "delta";
    case Quantity::Domega: return "domega";
    case Quantity::Voltage: return "v";
  }
  return "?";
}

std::optional<Quantity> parse_quantity(const std::string& text) {
  for (auto q : {Quantity::Delta, Quantity::Domega, Quantity::Voltage}) {
    if (text == to_string(q)) return q;
  }
  return std::nullopt;
}

std::string Channel::name() const { return "bus" + std::to_string(bus) + "." + to_string(quantity); }

double TimeSeriesSet::sample_interval() const {
  if (t_.size() < 2) return 0.0;
  return (t_.back() - t_.front()) / static_cast<double>(t_.size() - 1);
}

Channel& TimeSeriesSet::add_channel(int bus, Quantity q) {
  if (auto* existing = find(bus, q)) return *existing;
  channels_.push_back(Channel{bus, q, {}});
  return channels_.back();
}

const Channel* TimeSeriesSet::find(int bus, Quantity q) const {
  for (const auto& c : channels_) {
    if (c.bus == bus && c.quantity == q) return &c;
  }
  return nullptr;
}

Channel* TimeSeriesSet::find(int bus, Quantity q) {
  for (auto& c : channels_) {
    if (c.bus == bus && c.quantity == q) return &c;
  }
  return nullptr;
}

std::span<const double> TimeSeriesSet::values(int bus, Quantity q) const {
  const auto* c = find(bus, q);
  if (!c) {
    throw Error(ErrorKind::Configuration, "series has no channel bus" + std::to_string(bus) + "." +
                                              to_string(q));
  }
  return c->values;
}

bool TimeSeriesSet::has_quantity(Quantity q) const {
  for (const auto& c : channels_) {
    if (c.quantity == q) return true;
  }
  return false;
}

int TimeSeriesSet::max_bus() const {
  int m = -1;
  for (const auto& c : channels_) m = std::max(m, c.bus);
  return m;
}

namespace {

void put(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  line += buf;
}

}  // namespace

void TimeSeriesSet::write_csv(std::ostream& out) const {
  std::string line = "t";
  for (const auto& c : channels_) line += "," + c.name();
  out << line << '\n';
  for (std::size_t k = 0; k < t_.size(); ++k) {
    line.clear();
    put(line, t_[k]);
    for (const auto& c : channels_) {
      line += ',';
      put(line, c.values[k]);
    }
    out << line << '\n';
  }
}

void TimeSeriesSet::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Configuration, "cannot write " + path.string());
  write_csv(out);
}

TimeSeriesSet TimeSeriesSet::read_csv(std::istream& in, const std::string& source_name) {
  TimeSeriesSet set;
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorKind::Parse, source_name + ": empty CSV");
  std::vector<std::string> names;
  {
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  if (names.empty() || names[0] != "t") {
    throw Error(ErrorKind::Parse, source_name + ":1: first column must be 't'");
  }
  for (std::size_t k = 1; k < names.size(); ++k) {
    const auto& n = names[k];
    const auto dot = n.find('.');
    int bus = -1;
    std::optional<Quantity> q;
    if (n.rfind("bus", 0) == 0 && dot != std::string::npos) {
      auto [ptr, ec] = std::from_chars(n.data() + 3, n.data() + dot, bus);
      if (ec == std::errc() && ptr == n.data() + dot) q = parse_quantity(n.substr(dot + 1));
    }
    if (!q || bus < 0) {
      throw Error(ErrorKind::Parse, source_name + ":1: bad column name '" + n + "'");
    }
    set.add_channel(bus, *q);
  }
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::size_t col = 0;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + end, v);
      if (ec != std::errc() || ptr != line.data() + end) {
        throw Error(ErrorKind::Parse, source_name + ":" + std::to_string(row) +
                                          ": bad number in column " + std::to_string(col + 1));
      }
      if (col >= names.size()) {
        throw Error(ErrorKind::Parse, source_name + ":" + std::to_string(row) + ": too many cells");
      }
      if (col == 0) {
        set.t_.push_back(v);
      } else {
        set.channels_[col - 1].values.push_back(v);
      }
      ++col;
      start = end + 1;
    }
    if (col != names.size()) {
      throw Error(ErrorKind::Parse, source_name + ":" + std::to_string(row) + ": expected " +
                                        std::to_string(names.size()) + " cells");
    }
  }
  return set;
}

TimeSeriesSet TimeSeriesSet::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  return read_csv(in, path.string());
}

}  // namespace transwave
