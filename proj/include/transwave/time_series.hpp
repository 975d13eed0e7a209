#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace transwave {

enum class Quantity { Delta, Domega, Voltage };

/// CSV suffix for a quantity: "delta", "domega", "v".
const char* to_string(Quantity q);
std::optional<Quantity> parse_quantity(const std::string& text);

struct Channel {
  int bus = 0;
  Quantity quantity = Quantity::Domega;
  std::vector<double> values;

  std::string name() const;  // "bus<i>.<quantity>"
};

/// Uniformly sampled multi-channel waveforms sharing one time axis.
class TimeSeriesSet {
 public:
  TimeSeriesSet() = default;

  std::vector<double>& times() { return t_; }
  const std::vector<double>& times() const { return t_; }
  std::size_t sample_count() const { return t_.size(); }
  /// Sample spacing; 0 for fewer than two samples.
  double sample_interval() const;

  /// Adds an empty channel, or returns the existing one for (bus, quantity).
  Channel& add_channel(int bus, Quantity q);
  const Channel* find(int bus, Quantity q) const;
  Channel* find(int bus, Quantity q);
  /// Throws Error(Configuration) if the channel is missing.
  std::span<const double> values(int bus, Quantity q) const;

  const std::vector<Channel>& channels() const { return channels_; }
  std::vector<Channel>& channels() { return channels_; }
  bool has_quantity(Quantity q) const;
  int max_bus() const;

  /// CSV with header `t,<channel>...`; values printed with 12 significant digits.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;
  static TimeSeriesSet read_csv(std::istream& in, const std::string& source_name = "<csv>");
  static TimeSeriesSet read_csv(const std::filesystem::path& path);

 private:
  std::vector<double> t_;
  std::vector<Channel> channels_;
};

}  // namespace transwave
