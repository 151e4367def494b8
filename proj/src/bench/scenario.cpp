#include "xcast/bench/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "xcast/coding/codability.hpp"

namespace xcast::bench {

std::vector<std::uint32_t> sample_sizes(const SizeSpec& spec, std::uint32_t count, std::uint64_t seed) {
  std::vector<std::uint32_t> sizes(count, spec.mean_bytes);
  if (spec.cv <= 0.0) return sizes;
  const double sigma2 = std::log1p(spec.cv * spec.cv);
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> dist(std::log(spec.mean_bytes) - sigma2 / 2, std::sqrt(sigma2));
  for (auto& s : sizes) s = static_cast<std::uint32_t>(std::clamp(std::llround(dist(rng)), 1LL, 0xFFFFFFFFLL));
  return sizes;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> ClientSpec::stream() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t i = 0; i < segments; ++i) out.emplace_back(file, first_segment + i);
  return out;
}

server::Catalog Scenario::catalog() const {
  server::Catalog catalog;
  for (const auto& f : files) catalog.add_file(f.id, f.sizes);
  return catalog;
}

std::set<SegmentRef> Scenario::seeded_cache(const ClientSpec& client) const {
  const auto cat = catalog();
  std::set<SegmentRef> cache;
  auto add = [&](std::uint32_t f, std::uint32_t s) {
    if (auto ref = cat.lookup(f, s)) cache.insert(*ref);
  };
  for (const auto& [f, s] : client.cache) add(f, s);
  if (codability == CodabilityMode::full) {
    for (const auto& other : clients) {
      if (other.id == client.id) continue;
      for (const auto& [f, s] : other.stream()) {
        if (f != client.file) add(f, s);
      }
    }
  }
  return cache;
}

std::vector<Problem> Scenario::problems() const {
  std::vector<Problem> out;
  auto problem = [&](std::string path, std::string message) { out.push_back({std::move(path), std::move(message)}); };

  if (files.empty()) problem("files", "at least one file is required");
  if (clients.empty()) problem("clients", "at least one client is required");
  std::set<std::uint32_t> file_ids;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto path = "files[" + std::to_string(i) + "]";
    if (!file_ids.insert(files[i].id).second) problem(path + ".id", "duplicate file id " + std::to_string(files[i].id));
    if (files[i].sizes.empty()) problem(path + ".segments", "file has no segments");
    if (std::find(files[i].sizes.begin(), files[i].sizes.end(), 0U) != files[i].sizes.end()) {
      problem(path + ".sizes", "segment sizes must be positive");
    }
  }
  if (!out.empty()) return out;
  const auto cat = catalog();

  std::set<ClientId> client_ids;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const auto& c = clients[i];
    const auto path = "clients[" + std::to_string(i) + "]";
    if (!client_ids.insert(c.id).second) problem(path + ".id", "duplicate client id " + std::to_string(c.id));
    if (cat.segment_count(c.file) == 0) {
      problem(path + ".file", "unknown file " + std::to_string(c.file));
      continue;
    }
    if (c.first_segment == 0) problem(path + ".first_segment", "segment indices start at 1");
    if (c.segments == 0) problem(path + ".segments", "must request at least one segment");
    if (c.first_segment + c.segments - 1 > cat.segment_count(c.file)) {
      problem(path + ".segments", "stream runs past the end of file " + std::to_string(c.file));
    }
    if (c.start < Duration::zero() || c.think < Duration::zero()) problem(path, "times must not be negative");
    for (std::size_t k = 0; k < c.cache.size(); ++k) {
      if (!cat.lookup(c.cache[k].first, c.cache[k].second)) {
        problem(path + ".cache[" + std::to_string(k) + "]", "unknown segment f" + std::to_string(c.cache[k].first) +
                                                             "^" + std::to_string(c.cache[k].second));
      }
    }
    if (c.loss) {
      try {
        c.loss->validate();
      } catch (const ConfigError& e) {
        problem(path + ".loss", e.what());
      }
    }
  }
  try {
    channel.validate();
  } catch (const ConfigError& e) {
    problem("channel", e.what());
  }
  try {
    server.validate();
  } catch (const ConfigError& e) {
    problem("server", e.what());
  }
  if (codability != CodabilityMode::declared && !codable_pairs.empty()) {
    problem("codability.pairs", "pairs are only checked with mode = \"declared\"");
  }
  if (!out.empty()) return out;

  // every declared pair must satisfy the codability condition for every pair
  // of segments the two clients will ask for
  for (std::size_t i = 0; i < codable_pairs.size(); ++i) {
    const auto path = "codability.pairs[" + std::to_string(i) + "]";
    const auto [a_id, b_id] = codable_pairs[i];
    auto find = [&](ClientId id) {
      return std::find_if(clients.begin(), clients.end(), [&](const ClientSpec& c) { return c.id == id; });
    };
    auto a = find(a_id);
    auto b = find(b_id);
    if (a == clients.end() || b == clients.end() || a_id == b_id) {
      problem(path, "pair must name two distinct known clients");
      continue;
    }
    const auto ha = seeded_cache(*a);
    const auto hb = seeded_cache(*b);
    for (const auto& [f, s] : a->stream()) {
      if (!hb.contains(SegmentRef{f, s, 0})) {
        problem(path, "client " + std::to_string(b_id) + " does not cache f" + std::to_string(f) + "^" +
                          std::to_string(s) + " wanted by client " + std::to_string(a_id));
        break;
      }
    }
    for (const auto& [f, s] : b->stream()) {
      if (!ha.contains(SegmentRef{f, s, 0})) {
        problem(path, "client " + std::to_string(a_id) + " does not cache f" + std::to_string(f) + "^" +
                          std::to_string(s) + " wanted by client " + std::to_string(b_id));
        break;
      }
    }
  }
  return out;
}

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid scenario:";
  for (const auto& p : problems) out += "\n  " + p;
  return out;
}

class Loader {
 public:
  explicit Loader(std::string origin) : origin_(std::move(origin)) {}

  void error(const toml::node* node, const std::string& path, const std::string& message) {
    std::uint32_t line = node ? node->source().begin.line : 0;
    if (line == 0) {
      auto it = lines_.find(path);
      if (it != lines_.end()) line = it->second;
    }
    errors_.push_back(origin_ + ":" + std::to_string(line) + ": " + path + ": " + message);
  }

  void remember(const std::string& path, const toml::node& node) { lines_[path] = node.source().begin.line; }

  /// Line of the closest recorded ancestor of `path`.
  std::uint32_t line_of(std::string path) const {
    while (true) {
      if (auto it = lines_.find(path); it != lines_.end()) return it->second;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos) return 0;
      path.resize(cut);
    }
  }

  void unknown_keys(const toml::table& table, const std::string& path, std::initializer_list<std::string_view> known) {
    for (const auto& [key, node] : table) {
      if (std::find(known.begin(), known.end(), key.str()) == known.end()) {
        error(&node, path.empty() ? std::string(key.str()) : path + "." + std::string(key.str()), "unknown key");
      }
    }
  }

  std::optional<std::int64_t> integer(const toml::table& t, std::string_view key, const std::string& path) {
    const toml::node* node = t.get(key);
    if (!node) return std::nullopt;
    remember(path, *node);
    if (!node->is_integer()) {
      error(node, path, "expected an integer");
      return std::nullopt;
    }
    return node->value<std::int64_t>();
  }

  std::optional<std::int64_t> non_negative(const toml::table& t, std::string_view key, const std::string& path,
                                           std::int64_t max = std::numeric_limits<std::int64_t>::max()) {
    auto v = integer(t, key, path);
    if (v && (*v < 0 || *v > max)) {
      error(t.get(key), path, "out of range [0, " + std::to_string(max) + "]");
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> number(const toml::table& t, std::string_view key, const std::string& path) {
    const toml::node* node = t.get(key);
    if (!node) return std::nullopt;
    remember(path, *node);
    if (!node->is_number()) {
      error(node, path, "expected a number");
      return std::nullopt;
    }
    return node->value<double>();
  }

  std::optional<bool> boolean(const toml::table& t, std::string_view key, const std::string& path) {
    const toml::node* node = t.get(key);
    if (!node) return std::nullopt;
    remember(path, *node);
    if (!node->is_boolean()) {
      error(node, path, "expected true or false");
      return std::nullopt;
    }
    return node->value<bool>();
  }

  std::optional<std::string> string(const toml::table& t, std::string_view key, const std::string& path) {
    const toml::node* node = t.get(key);
    if (!node) return std::nullopt;
    remember(path, *node);
    if (!node->is_string()) {
      error(node, path, "expected a string");
      return std::nullopt;
    }
    return node->value<std::string>();
  }

  const toml::table* table(const toml::table& t, std::string_view key, const std::string& path) {
    const toml::node* node = t.get(key);
    if (!node) return nullptr;
    remember(path, *node);
    if (!node->is_table()) {
      error(node, path, "expected a table");
      return nullptr;
    }
    return node->as_table();
  }

  const toml::array* array(const toml::table& t, std::string_view key, const std::string& path) {
    const toml::node* node = t.get(key);
    if (!node) return nullptr;
    remember(path, *node);
    if (!node->is_array()) {
      error(node, path, "expected an array");
      return nullptr;
    }
    return node->as_array();
  }

  std::optional<std::pair<std::uint32_t, std::uint32_t>> pair(const toml::node& node, const std::string& path) {
    remember(path, node);
    const auto* a = node.as_array();
    if (!a || a->size() != 2 || !(*a)[0].is_integer() || !(*a)[1].is_integer()) {
      error(&node, path, "expected a pair of integers");
      return std::nullopt;
    }
    const auto x = (*a)[0].value<std::int64_t>().value_or(-1);
    const auto y = (*a)[1].value<std::int64_t>().value_or(-1);
    if (x < 0 || y < 0 || x > 0xFFFFFFFFLL || y > 0xFFFFFFFFLL) {
      error(&node, path, "ids must be unsigned 32-bit");
      return std::nullopt;
    }
    return std::pair{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)};
  }

  std::optional<netsim::LossModel> loss(const toml::table& t, const std::string& path) {
    const toml::table* lt = table(t, "loss", path);
    if (!lt) return std::nullopt;
    unknown_keys(*lt, path, {"model", "p", "p_enter", "p_stay"});
    const auto model = string(*lt, "model", path + ".model").value_or("none");
    netsim::LossModel m;
    if (model == "none") {
      m = netsim::LossModel::none();
    } else if (model == "iid") {
      m = netsim::LossModel::iid(number(*lt, "p", path + ".p").value_or(0.0));
    } else if (model == "burst") {
      m = netsim::LossModel::burst(number(*lt, "p_enter", path + ".p_enter").value_or(0.0),
                                   number(*lt, "p_stay", path + ".p_stay").value_or(0.0));
    } else {
      error(lt->get("model"), path + ".model", "expected none, iid or burst");
    }
    return m;
  }

  void server_table(const toml::table& root, server::ServerConfig& cfg) {
    if (const auto* sv = table(root, "server", "server")) {
      unknown_keys(*sv, "server", {"payload_size", "t_r_ms", "ret_req_timeout_ms", "max_missed_rounds",
                                   "max_retransmission_rounds", "coding", "proactive", "size_affinity", "max_queue",
                                   "proactive_ttl_s"});
      if (auto v = non_negative(*sv, "payload_size", "server.payload_size", 65535)) {
        cfg.payload_size = static_cast<std::uint16_t>(*v);
      }
      if (auto v = number(*sv, "t_r_ms", "server.t_r_ms")) {
        cfg.scheduler.t_r = std::chrono::duration_cast<Duration>(std::chrono::duration<double, std::milli>(*v));
      }
      if (auto v = number(*sv, "ret_req_timeout_ms", "server.ret_req_timeout_ms")) {
        cfg.ret_req_timeout = std::chrono::duration_cast<Duration>(std::chrono::duration<double, std::milli>(*v));
      }
      if (auto v = non_negative(*sv, "max_missed_rounds", "server.max_missed_rounds", 1000)) {
        cfg.max_missed_rounds = static_cast<std::uint32_t>(*v);
      }
      if (auto v = non_negative(*sv, "max_retransmission_rounds", "server.max_retransmission_rounds", 1000)) {
        cfg.max_retransmission_rounds = static_cast<std::uint32_t>(*v);
      }
      if (auto v = boolean(*sv, "coding", "server.coding")) cfg.scheduler.coding_enabled = *v;
      if (auto v = boolean(*sv, "proactive", "server.proactive")) cfg.scheduler.proactive_enabled = *v;
      if (auto v = number(*sv, "size_affinity", "server.size_affinity")) cfg.scheduler.size_affinity = *v;
      if (auto v = non_negative(*sv, "max_queue", "server.max_queue", 1'000'000)) {
        cfg.scheduler.max_queue = static_cast<std::size_t>(*v);
      }
      if (auto v = number(*sv, "proactive_ttl_s", "server.proactive_ttl_s")) {
        cfg.scheduler.proactive_ttl = std::chrono::duration_cast<Duration>(std::chrono::duration<double>(*v));
      }
    }
  }

  std::vector<FileSpec> files(const toml::table& root, std::uint64_t seed) {
    std::vector<FileSpec> out;
    if (const auto* files = array(root, "files", "files")) {
      for (std::size_t i = 0; i < files->size(); ++i) {
        const auto path = "files[" + std::to_string(i) + "]";
        const auto* ft = (*files)[i].as_table();
        remember(path, (*files)[i]);
        if (!ft) {
          error(&(*files)[i], path, "expected a table");
          continue;
        }
        unknown_keys(*ft, path, {"id", "segments", "size_bytes", "size_cv", "sizes"});
        FileSpec f;
        f.id = static_cast<std::uint32_t>(non_negative(*ft, "id", path + ".id", 0xFFFFFFFFLL).value_or(0));
        if (!ft->get("id")) error(ft, path + ".id", "required");
        if (const auto* sizes = array(*ft, "sizes", path + ".sizes")) {
          for (std::size_t k = 0; k < sizes->size(); ++k) {
            auto v = (*sizes)[k].value<std::int64_t>();
            if (!(*sizes)[k].is_integer() || !v || *v <= 0 || *v > 0xFFFFFFFFLL) {
              error(&(*sizes)[k], path + ".sizes[" + std::to_string(k) + "]", "expected a positive size");
              continue;
            }
            f.sizes.push_back(static_cast<std::uint32_t>(*v));
          }
          if (ft->get("segments") || ft->get("size_bytes") || ft->get("size_cv")) {
            error(ft->get("sizes"), path + ".sizes", "sizes excludes segments, size_bytes and size_cv");
          }
        } else {
          const auto count = non_negative(*ft, "segments", path + ".segments", 65535);
          if (!count) error(ft, path + ".segments", "required unless sizes is given");
          SizeSpec spec;
          spec.mean_bytes = static_cast<std::uint32_t>(
              non_negative(*ft, "size_bytes", path + ".size_bytes", 0xFFFFFFFFLL).value_or(spec.mean_bytes));
          spec.cv = number(*ft, "size_cv", path + ".size_cv").value_or(0.0);
          if (spec.cv < 0) error(ft->get("size_cv"), path + ".size_cv", "must not be negative");
          f.sizes = sample_sizes(spec, static_cast<std::uint32_t>(count.value_or(0)), seed * 1000003ULL + f.id);
        }
        out.push_back(std::move(f));
      }
    }
    return out;
  }

  Scenario load(const std::string& text) {
    toml::table root;
    try {
      root = toml::parse(text, origin_);
    } catch (const toml::parse_error& e) {
      errors_.push_back(origin_ + ":" + std::to_string(e.source().begin.line) + ": " + std::string(e.description()));
      throw ScenarioError(errors_);
    }
    Scenario s;
    unknown_keys(root, "", {"name", "seed", "time_limit_s", "channel", "server", "files", "clients", "codability"});
    s.name = string(root, "name", "name").value_or(s.name);
    s.seed = static_cast<std::uint64_t>(non_negative(root, "seed", "seed").value_or(1));
    if (auto limit = number(root, "time_limit_s", "time_limit_s")) {
      s.time_limit = std::chrono::duration_cast<Duration>(std::chrono::duration<double>(*limit));
    }
    s.channel.rng_seed = s.seed;

    if (const auto* ch = table(root, "channel", "channel")) {
      unknown_keys(*ch, "channel", {"multicast_rate_mbps", "control_latency_us", "rng_seed", "loss"});
      if (auto r = number(*ch, "multicast_rate_mbps", "channel.multicast_rate_mbps")) {
        s.channel.multicast_rate_bps = *r * 1e6;
      }
      if (auto l = non_negative(*ch, "control_latency_us", "channel.control_latency_us")) {
        s.channel.control_latency = std::chrono::microseconds(*l);
      }
      if (auto seed = non_negative(*ch, "rng_seed", "channel.rng_seed")) {
        s.channel.rng_seed = static_cast<std::uint64_t>(*seed);
      }
      if (auto l = loss(*ch, "channel.loss")) s.channel.default_loss = *l;
    }

    server_table(root, s.server);
    s.files = files(root, s.seed);

    if (const auto* clients = array(root, "clients", "clients")) {
      for (std::size_t i = 0; i < clients->size(); ++i) {
        const auto path = "clients[" + std::to_string(i) + "]";
        const auto* ct = (*clients)[i].as_table();
        remember(path, (*clients)[i]);
        if (!ct) {
          error(&(*clients)[i], path, "expected a table");
          continue;
        }
        unknown_keys(*ct, path, {"id", "file", "first_segment", "segments", "start_ms", "think_ms", "cache", "loss"});
        ClientSpec c;
        c.id = static_cast<ClientId>(non_negative(*ct, "id", path + ".id", 0xFFFFFFFFLL).value_or(0));
        if (!ct->get("id")) error(ct, path + ".id", "required");
        c.file = static_cast<std::uint32_t>(non_negative(*ct, "file", path + ".file", 0xFFFFFFFFLL).value_or(0));
        if (!ct->get("file")) error(ct, path + ".file", "required");
        c.first_segment = static_cast<std::uint32_t>(
            non_negative(*ct, "first_segment", path + ".first_segment", 0xFFFFFFFFLL).value_or(1));
        c.segments =
            static_cast<std::uint32_t>(non_negative(*ct, "segments", path + ".segments", 0xFFFFFFFFLL).value_or(1));
        if (auto v = number(*ct, "start_ms", path + ".start_ms")) {
          c.start = std::chrono::duration_cast<Duration>(std::chrono::duration<double, std::milli>(*v));
        }
        if (auto v = number(*ct, "think_ms", path + ".think_ms")) {
          c.think = std::chrono::duration_cast<Duration>(std::chrono::duration<double, std::milli>(*v));
        }
        if (const auto* cache = array(*ct, "cache", path + ".cache")) {
          for (std::size_t k = 0; k < cache->size(); ++k) {
            if (auto p = pair((*cache)[k], path + ".cache[" + std::to_string(k) + "]")) c.cache.push_back(*p);
          }
        }
        c.loss = loss(*ct, path + ".loss");
        s.clients.push_back(std::move(c));
      }
    }

    if (const auto* cod = table(root, "codability", "codability")) {
      unknown_keys(*cod, "codability", {"mode", "pairs"});
      const auto mode = string(*cod, "mode", "codability.mode").value_or("none");
      if (mode == "none") {
        s.codability = CodabilityMode::none;
      } else if (mode == "full") {
        s.codability = CodabilityMode::full;
      } else if (mode == "declared") {
        s.codability = CodabilityMode::declared;
      } else {
        error(cod->get("mode"), "codability.mode", "expected none, full or declared");
      }
      if (const auto* pairs = array(*cod, "pairs", "codability.pairs")) {
        for (std::size_t k = 0; k < pairs->size(); ++k) {
          if (auto p = pair((*pairs)[k], "codability.pairs[" + std::to_string(k) + "]")) s.codable_pairs.push_back(*p);
        }
      }
    }

    if (errors_.empty()) {
      for (const auto& p : s.problems()) {
        errors_.push_back(origin_ + ":" + std::to_string(line_of(p.path)) + ": " + p.path + ": " + p.message);
      }
    }
    if (!errors_.empty()) throw ScenarioError(errors_);
    return s;
  }

  ServiceConfig load_service(const std::string& text) {
    toml::table root;
    try {
      root = toml::parse(text, origin_);
    } catch (const toml::parse_error& e) {
      errors_.push_back(origin_ + ":" + std::to_string(e.source().begin.line) + ": " + std::string(e.description()));
      throw ScenarioError(errors_);
    }
    ServiceConfig c;
    unknown_keys(root, "", {"seed", "network", "server", "files", "origin"});
    c.seed = static_cast<std::uint64_t>(non_negative(root, "seed", "seed").value_or(1));
    if (const auto* net = table(root, "network", "network")) {
      unknown_keys(*net, "network", {"bind_address", "port", "multicast_group", "multicast_port",
                                     "multicast_interface", "multicast_rate_mbps"});
      c.bind_address = string(*net, "bind_address", "network.bind_address").value_or(c.bind_address);
      if (auto v = non_negative(*net, "port", "network.port", 65535)) c.port = static_cast<std::uint16_t>(*v);
      c.multicast_group = string(*net, "multicast_group", "network.multicast_group").value_or(c.multicast_group);
      if (auto v = non_negative(*net, "multicast_port", "network.multicast_port", 65535)) {
        c.multicast_port = static_cast<std::uint16_t>(*v);
      }
      c.multicast_interface =
          string(*net, "multicast_interface", "network.multicast_interface").value_or(c.multicast_interface);
      if (auto r = number(*net, "multicast_rate_mbps", "network.multicast_rate_mbps")) {
        if (*r <= 0) error(net->get("multicast_rate_mbps"), "network.multicast_rate_mbps", "must be positive");
        c.multicast_rate_bps = *r * 1e6;
      }
    }
    server_table(root, c.server);
    c.files = files(root, c.seed);
    if (const auto* org = table(root, "origin", "origin")) {
      unknown_keys(*org, "origin", {"url"});
      c.origin = string(*org, "url", "origin.url").value_or(c.origin);
      if (c.origin != "synthetic" && c.origin.rfind("http://", 0) != 0) {
        error(org->get("url"), "origin.url", "expected synthetic or an http:// URL");
      }
    }
    if (errors_.empty()) {
      try {
        c.server.validate();
      } catch (const ConfigError& e) {
        error(nullptr, "server", e.what());
      }
      std::set<std::uint32_t> ids;
      for (std::size_t i = 0; i < c.files.size(); ++i) {
        const auto path = "files[" + std::to_string(i) + "]";
        if (!ids.insert(c.files[i].id).second) error(nullptr, path + ".id", "duplicate file id");
        if (c.files[i].sizes.empty()) error(nullptr, path, "file has no segments");
      }
    }
    if (!errors_.empty()) throw ScenarioError(errors_);
    return c;
  }

 private:
  std::string origin_;
  std::vector<std::string> errors_;
  std::map<std::string, std::uint32_t> lines_;
};

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : ConfigError(join_problems(problems)), problems_(std::move(problems)) {}

void Scenario::validate() const {
  std::vector<std::string> lines;
  for (const auto& p : problems()) lines.push_back(p.path + ": " + p.message);
  if (!lines.empty()) throw ScenarioError(std::move(lines));
}

Scenario load_scenario(const std::string& toml_text, const std::string& origin) {
  return Loader(origin).load(toml_text);
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({path + ":0: cannot open file"});
  std::ostringstream text;
  text << in.rdbuf();
  return load_scenario(text.str(), path);
}

server::Catalog ServiceConfig::catalog() const {
  server::Catalog catalog;
  for (const auto& f : files) catalog.add_file(f.id, f.sizes);
  return catalog;
}

ServiceConfig load_service_config(const std::string& toml_text, const std::string& origin) {
  return Loader(origin).load_service(toml_text);
}

ServiceConfig load_service_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({path + ":0: cannot open file"});
  std::ostringstream text;
  text << in.rdbuf();
  return load_service_config(text.str(), path);
}

Scenario sweep_scenario(std::uint32_t clients, const SweepOptions& options) {
  Scenario s;
  s.name = "sweep-k" + std::to_string(clients);
  s.seed = options.seed;
  s.channel.multicast_rate_bps = options.rate_bps;
  s.channel.rng_seed = options.seed;
  if (options.loss) s.channel.default_loss = *options.loss;
  s.server.scheduler.coding_enabled = options.coding;
  s.server.scheduler.proactive_enabled = options.proactive;
  s.codability = CodabilityMode::full;
  for (std::uint32_t k = 1; k <= clients; ++k) {
    s.files.push_back({k, sample_sizes(options.size, options.segments, options.seed * 1000003ULL + k)});
    ClientSpec c;
    c.id = k;
    c.file = k;
    c.segments = options.segments;
    s.clients.push_back(c);
  }
  return s;
}

}  // namespace xcast::bench
