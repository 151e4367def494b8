#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xcast/netsim/network.hpp"
#include "xcast/server/catalog.hpp"
#include "xcast/server/edge_server.hpp"

namespace xcast::bench {

using namespace std::chrono_literals;

/// Segment sizes of one file: fixed, or lognormal with the given mean and
/// coefficient of variation (CV 0 gives the fixed size).
struct SizeSpec {
  std::uint32_t mean_bytes = 250'000;
  double cv = 0.0;

  friend bool operator==(const SizeSpec&, const SizeSpec&) = default;
};

std::vector<std::uint32_t> sample_sizes(const SizeSpec& spec, std::uint32_t count, std::uint64_t seed);

struct FileSpec {
  std::uint32_t id = 0;
  std::vector<std::uint32_t> sizes;
};

/// A streaming client: requests `segments` consecutive segments of `file`
/// starting at `first_segment`, each `think` after the previous delivery.
struct ClientSpec {
  ClientId id = 0;
  std::uint32_t file = 0;
  std::uint32_t first_segment = 1;
  std::uint32_t segments = 1;
  Duration start{};
  Duration think = 1ms;
  /// Pre-seeded cache, as (file, segment) pairs.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> cache;
  std::optional<netsim::LossModel> loss;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> stream() const;
};

/// none: caches only as listed. full: every client also caches every segment
/// the others stream. declared: the listed pairs must already be codable
/// through the listed caches.
enum class CodabilityMode { none, full, declared };

struct Problem {
  /// Dotted field path, e.g. "clients[1].file".
  std::string path;
  std::string message;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  std::vector<FileSpec> files;
  std::vector<ClientSpec> clients;
  netsim::ChannelConfig channel;
  server::ServerConfig server;
  CodabilityMode codability = CodabilityMode::none;
  std::vector<std::pair<ClientId, ClientId>> codable_pairs;
  /// Virtual-time cap on a run.
  Duration time_limit = std::chrono::hours(1);

  server::Catalog catalog() const;
  /// Cache contents of `client` after codability seeding.
  std::set<SegmentRef> seeded_cache(const ClientSpec& client) const;
  std::vector<Problem> problems() const;
  /// Throws ScenarioError listing every problem.
  void validate() const;
};

/// Load or validation failure; every entry is "file:line: message".
class ScenarioError : public ConfigError {
 public:
  explicit ScenarioError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Parses and validates a scenario file. `origin` names the source in messages.
Scenario load_scenario(const std::string& toml_text, const std::string& origin = "scenario");
Scenario load_scenario_file(const std::string& path);

struct SweepOptions {
  std::uint32_t segments = 40;
  SizeSpec size;
  double rate_bps = 24e6;
  std::optional<netsim::LossModel> loss;
  bool coding = true;
  bool proactive = true;
  std::uint64_t seed = 1;
};

/// Settings for a real-socket edge server.
struct ServiceConfig {
  std::string bind_address = "0.0.0.0";
  std::uint16_t port = 7700;
  std::string multicast_group = "239.77.0.1";
  std::uint16_t multicast_port = 7701;
  std::string multicast_interface = "127.0.0.1";
  double multicast_rate_bps = 24e6;
  server::ServerConfig server;
  std::vector<FileSpec> files;
  /// "synthetic" or an http:// base URL.
  std::string origin = "synthetic";
  std::uint64_t seed = 1;

  server::Catalog catalog() const;
};

ServiceConfig load_service_config(const std::string& toml_text, const std::string& origin = "config");
ServiceConfig load_service_config_file(const std::string& path);

/// K fully codable clients, each streaming its own file, all starting at t=0.
Scenario sweep_scenario(std::uint32_t clients, const SweepOptions& options);

}  // namespace xcast::bench
