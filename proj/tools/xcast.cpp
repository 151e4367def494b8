#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "xcast/bench/report.hpp"
#include "xcast/bench/runner.hpp"
#include "xcast/sockets/client_runtime.hpp"
#include "xcast/sockets/http_origin.hpp"
#include "xcast/sockets/server_runtime.hpp"

using namespace xcast;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_runtime = 3;

std::function<void()> on_signal;
volatile std::sig_atomic_t stop_requested = 0;

void handle_signal(int) {
  if (on_signal) on_signal();
}

void install_signals(std::function<void()> stop) {
  on_signal = std::move(stop);
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
}

/// "a..b" or "a,b,c" or "a".
std::vector<std::uint32_t> parse_range(const std::string& text) {
  std::vector<std::uint32_t> out;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = std::stoul(text.substr(0, dots));
    const auto hi = std::stoul(text.substr(dots + 2));
    if (lo == 0 || hi < lo || hi > 1000) throw ConfigError("bad client range " + text);
    for (auto k = lo; k <= hi; ++k) out.push_back(static_cast<std::uint32_t>(k));
    return out;
  }
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto k = std::stoul(part);
    if (k == 0 || k > 1000) throw ConfigError("bad client count " + part);
    out.push_back(static_cast<std::uint32_t>(k));
  }
  if (out.empty()) throw ConfigError("empty client range");
  return out;
}

std::pair<std::uint32_t, std::uint32_t> parse_ref(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) throw ConfigError("expected FILE/SEGMENT, got " + text);
  return {static_cast<std::uint32_t>(std::stoul(text.substr(0, slash))),
          static_cast<std::uint32_t>(std::stoul(text.substr(slash + 1)))};
}

/// "none", "iid:P" or "burst:P_ENTER:P_STAY".
netsim::LossModel parse_loss(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ':')) parts.push_back(part);
  if (parts.size() == 1 && parts[0] == "none") return netsim::LossModel::none();
  if (parts.size() == 2 && parts[0] == "iid") return netsim::LossModel::iid(std::stod(parts[1]));
  if (parts.size() == 3 && parts[0] == "burst") {
    return netsim::LossModel::burst(std::stod(parts[1]), std::stod(parts[2]));
  }
  throw ConfigError("bad loss model " + text + " (none, iid:P, burst:P_ENTER:P_STAY)");
}

void write_trace(const std::vector<netsim::TraceEvent>& events, const std::string& path) {
  netsim::Trace trace;
  for (const auto& e : events) trace.record(e);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << trace.to_json_lines();
}

void print_reports(const std::vector<bench::MetricsReport>& reports) {
  std::cout << std::left << std::setw(14) << "scenario" << std::right << std::setw(4) << "K" << std::setw(14)
            << "coded_bytes" << std::setw(14) << "uncoded_bytes" << std::setw(8) << "gain" << std::setw(10)
            << "ctrl_frac" << std::setw(12) << "thr_mbps" << std::setw(6) << "ok" << "\n";
  for (const auto& r : reports) {
    const bool ok = r.coded.fidelity && r.coded.finished && r.uncoded.fidelity && r.uncoded.finished;
    std::cout << std::left << std::setw(14) << r.name << std::right << std::setw(4) << r.clients << std::setw(14)
              << r.coded.bytes_total() << std::setw(14) << r.uncoded.bytes_total() << std::setw(8) << std::fixed
              << std::setprecision(3) << r.coding_gain << std::setw(10) << std::setprecision(5) << r.control_fraction
              << std::setw(12) << std::setprecision(2) << r.coded.mean_throughput_bps() / 1e6 << std::setw(6)
              << (ok ? "yes" : "NO") << "\n";
  }
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> parse_files(const std::vector<std::string>& specs) {
  // FILE:SEGMENTS[:SIZE]
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ConfigError("expected FILE:SEGMENTS, got " + s);
    out.emplace_back(static_cast<std::uint32_t>(std::stoul(s.substr(0, colon))),
                     static_cast<std::uint32_t>(std::stoul(s.substr(colon + 1))));
  }
  return out;
}

std::vector<bench::FileSpec> file_specs(const std::vector<std::string>& specs, std::uint32_t size) {
  std::vector<bench::FileSpec> out;
  for (const auto& [id, count] : parse_files(specs)) {
    out.push_back({id, std::vector<std::uint32_t>(count, size)});
  }
  return out;
}

const char* delivery_name(client::Delivery d) {
  switch (d) {
    case client::Delivery::local: return "local cache";
    case client::Delivery::multicast: return "multicast";
    case client::Delivery::fallback: return "unicast fallback";
    case client::Delivery::failed: return "nothing";
  }
  return "?";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xcast: index-coded multicast delivery for edge caches"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the edge server over TCP and UDP multicast");
  std::string serve_config;
  bench::ServiceConfig service;
  std::vector<std::string> serve_files{"1:100"};
  std::uint32_t serve_size = 250'000;
  double serve_rate_mbps = 24.0;
  serve->add_option("--config", serve_config, "TOML service config");
  serve->add_option("--bind", service.bind_address, "Listen address");
  serve->add_option("--port", service.port, "TCP control port");
  serve->add_option("--group", service.multicast_group, "Multicast group");
  serve->add_option("--mcast-port", service.multicast_port, "Multicast UDP port");
  serve->add_option("--interface", service.multicast_interface, "Local address of the multicast interface");
  serve->add_option("--rate-mbps", serve_rate_mbps, "Multicast pacing rate");
  serve->add_option("--origin", service.origin, "Origin base URL or 'synthetic'");
  serve->add_option("--files", serve_files, "Catalog entries FILE:SEGMENTS (without --config)")->delimiter(',');
  serve->add_option("--segment-size", serve_size, "Segment size in bytes (without --config)");
  serve->add_flag("!--no-coding", service.server.scheduler.coding_enabled, "Disable index coding");
  serve->add_flag("!--no-proactive", service.server.scheduler.proactive_enabled, "Disable proactive coding");

  // client
  auto* client = app.add_subcommand("client", "Run a client with a local HTTP proxy");
  sockets::ClientRuntimeConfig client_cfg;
  std::string server_addr = "127.0.0.1:7700";
  std::vector<std::string> gets;
  std::string stream;
  client_cfg.proxy = true;
  client->add_option("--id", client_cfg.id, "Client id")->required();
  client->add_option("--server", server_addr, "HOST:PORT of the edge server");
  client->add_option("--group", client_cfg.multicast_group, "Multicast group");
  client->add_option("--mcast-port", client_cfg.multicast_port, "Multicast UDP port");
  client->add_option("--interface", client_cfg.multicast_interface, "Local address of the multicast interface");
  client->add_option("--proxy-port", client_cfg.proxy_port, "Local proxy port (0 disables the proxy)");
  client->add_option("--get", gets, "Fetch FILE/SEGMENT and exit");
  client->add_option("--stream", stream, "Fetch FILE/FIRST..LAST in order and exit");

  // origin
  auto* origin = app.add_subcommand("origin", "Serve synthetic segments over HTTP");
  std::uint16_t origin_port = 8080;
  std::string origin_bind = "127.0.0.1";
  std::vector<std::string> origin_files{"1:100"};
  std::uint32_t origin_size = 250'000;
  origin->add_option("--bind", origin_bind, "Listen address");
  origin->add_option("--port", origin_port, "HTTP port");
  origin->add_option("--files", origin_files, "Catalog entries FILE:SEGMENTS")->delimiter(',');
  origin->add_option("--segment-size", origin_size, "Segment size in bytes");

  // sim
  auto* sim = app.add_subcommand("sim", "Simulated experiments");
  sim->require_subcommand(1);
  auto* sim_run = sim->add_subcommand("run", "Run a scenario file");
  std::string scenario_path;
  std::string trace_path;
  std::string report_stem;
  sim_run->add_option("scenario", scenario_path, "Scenario TOML")->required();
  sim_run->add_option("--trace", trace_path, "Write the coded run's trace as JSON lines");
  sim_run->add_option("--report", report_stem, "Write STEM.csv and STEM.json");

  auto* sim_sweep = sim->add_subcommand("sweep", "Sweep the number of clients");
  std::string clients_range = "1..5";
  std::string toggle = "coding";
  bench::SweepOptions sweep;
  std::string loss_text = "none";
  double sweep_rate_mbps = 24.0;
  std::string sweep_report;
  sim_sweep->add_option("--clients", clients_range, "K values, e.g. 1..5 or 1,3,5");
  sim_sweep->add_option("--toggle", toggle, "Baseline switch: coding or proactive")
      ->check(CLI::IsMember({"coding", "proactive"}));
  sim_sweep->add_option("--segments", sweep.segments, "Segments per client");
  sim_sweep->add_option("--size", sweep.size.mean_bytes, "Mean segment size in bytes");
  sim_sweep->add_option("--cv", sweep.size.cv, "Segment size coefficient of variation");
  sim_sweep->add_option("--rate-mbps", sweep_rate_mbps, "Multicast rate");
  sim_sweep->add_option("--loss", loss_text, "none, iid:P or burst:P_ENTER:P_STAY");
  sim_sweep->add_option("--seed", sweep.seed, "RNG seed");
  sim_sweep->add_option("--report", sweep_report, "Write STEM.csv and STEM.json");

  // report
  auto* report = app.add_subcommand("report", "Summarize a JSON-lines trace");
  std::string report_trace;
  report->add_option("trace", report_trace, "Trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    if (*serve) {
      if (!serve_config.empty()) {
        // Command-line flags given explicitly still win over the file.
        auto loaded = bench::load_service_config_file(serve_config);
        if (serve->count("--bind") == 0) service.bind_address = loaded.bind_address;
        if (serve->count("--port") == 0) service.port = loaded.port;
        if (serve->count("--group") == 0) service.multicast_group = loaded.multicast_group;
        if (serve->count("--mcast-port") == 0) service.multicast_port = loaded.multicast_port;
        if (serve->count("--interface") == 0) service.multicast_interface = loaded.multicast_interface;
        if (serve->count("--rate-mbps") == 0) serve_rate_mbps = loaded.multicast_rate_bps / 1e6;
        if (serve->count("--origin") == 0) service.origin = loaded.origin;
        const bool coding = service.server.scheduler.coding_enabled;
        const bool proactive = service.server.scheduler.proactive_enabled;
        service.server = loaded.server;
        if (serve->count("--no-coding") > 0) service.server.scheduler.coding_enabled = coding;
        if (serve->count("--no-proactive") > 0) service.server.scheduler.proactive_enabled = proactive;
        service.files = loaded.files;
      } else {
        service.files = file_specs(serve_files, serve_size);
      }
      if (serve_rate_mbps <= 0) throw ConfigError("--rate-mbps must be positive");
      service.server.validate();

      sockets::ServerRuntimeConfig cfg;
      cfg.bind_address = service.bind_address;
      cfg.port = service.port;
      cfg.multicast_group = service.multicast_group;
      cfg.multicast_port = service.multicast_port;
      cfg.multicast_interface = service.multicast_interface;
      cfg.multicast_rate_bps = serve_rate_mbps * 1e6;
      cfg.server = service.server;

      const auto catalog = service.catalog();
      sockets::OriginFactory factory;
      if (service.origin == "synthetic") {
        factory = [](sockets::EventLoop&) { return std::make_unique<server::SyntheticOrigin>(); };
      } else {
        const auto url = service.origin;
        factory = [url](sockets::EventLoop& loop) { return std::make_unique<sockets::HttpOrigin>(url, loop); };
      }
      sockets::ServerRuntime runtime(cfg, catalog, factory);
      install_signals([&runtime] { runtime.stop(); });
      std::cerr << "xcast serve: control tcp " << cfg.bind_address << ":" << runtime.port() << ", multicast "
                << cfg.multicast_group << ":" << cfg.multicast_port << ", " << catalog.file_ids().size()
                << " files, origin " << service.origin << "\n";
      runtime.run();
      return exit_ok;
    }

    if (*client) {
      const auto colon = server_addr.rfind(':');
      if (colon == std::string::npos) throw ConfigError("--server expects HOST:PORT");
      client_cfg.server_host = server_addr.substr(0, colon);
      client_cfg.server_port = static_cast<std::uint16_t>(std::stoul(server_addr.substr(colon + 1)));
      std::vector<std::pair<std::uint32_t, std::uint32_t>> wanted;
      for (const auto& g : gets) wanted.push_back(parse_ref(g));
      if (!stream.empty()) {
        const auto slash = stream.find('/');
        if (slash == std::string::npos) throw ConfigError("--stream expects FILE/FIRST..LAST");
        const auto file = static_cast<std::uint32_t>(std::stoul(stream.substr(0, slash)));
        for (auto s : parse_range(stream.substr(slash + 1))) wanted.emplace_back(file, s);
      }
      const bool one_shot = !wanted.empty();
      client_cfg.proxy = !one_shot && client_cfg.proxy_port != 0;

      sockets::ClientRuntime runtime(client_cfg);
      runtime.start();
      if (one_shot) {
        int failures = 0;
        for (const auto& [file, seg] : wanted) {
          const auto result = runtime.request(file, seg);
          std::cout << file << "/" << seg << " ";
          if (result.ok()) {
            const double t_e = std::chrono::duration<double>(result.t_e()).count();
            std::cout << result.body->size() << " bytes via " << delivery_name(result.delivery) << " in "
                      << std::fixed << std::setprecision(3) << t_e * 1e3 << " ms\n";
          } else {
            ++failures;
            std::cout << "failed: " << result.error << "\n";
          }
        }
        runtime.stop();
        return failures == 0 ? exit_ok : exit_runtime;
      }
      if (!client_cfg.proxy) throw ConfigError("nothing to do: give --get, --stream or a proxy port");
      std::cerr << "xcast client " << client_cfg.id << ": proxy on http://" << client_cfg.proxy_address << ":"
                << runtime.proxy_port() << "/video/{file}/{segment}\n";
      install_signals([] { stop_requested = 1; });
      while (!stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      runtime.stop();
      return exit_ok;
    }

    if (*origin) {
      server::Catalog catalog;
      for (const auto& f : file_specs(origin_files, origin_size)) catalog.add_file(f.id, f.sizes);
      sockets::OriginServer server(catalog);
      install_signals([&server] { server.stop(); });
      std::cerr << "xcast origin: http://" << origin_bind << ":" << origin_port << "/{file}/{segment}.bin\n";
      server.listen(origin_bind, origin_port);
      return exit_ok;
    }

    if (*sim_run) {
      const auto scenario = bench::load_scenario_file(scenario_path);
      auto report_value = bench::run_scenario(scenario);
      if (!trace_path.empty()) {
        const auto traced = bench::simulate(scenario, true);
        write_trace(traced.trace, trace_path);
      }
      print_reports({report_value});
      if (!report_stem.empty()) {
        for (const auto& p : bench::emit_report({report_value}, report_stem)) std::cerr << "wrote " << p << "\n";
      }
      const auto& c = report_value.coded;
      return c.fidelity && c.finished ? exit_ok : exit_runtime;
    }

    if (*sim_sweep) {
      sweep.rate_bps = sweep_rate_mbps * 1e6;
      if (sweep.rate_bps <= 0) throw ConfigError("--rate-mbps must be positive");
      if (loss_text != "none") sweep.loss = parse_loss(loss_text);
      if (sweep.loss) sweep.loss->validate();
      const auto ks = parse_range(clients_range);
      std::vector<bench::MetricsReport> reports;
      if (toggle == "coding") {
        reports = bench::run_sweep(ks, sweep);
      } else {
        // Proactive on vs off; gain is the TX-byte ratio of the two.
        for (auto k : ks) {
          auto on = sweep;
          on.proactive = true;
          auto off = sweep;
          off.proactive = false;
          bench::MetricsReport r;
          r.name = "proactive-k" + std::to_string(k);
          r.clients = k;
          r.coded = bench::simulate(bench::sweep_scenario(k, on));
          r.uncoded = bench::simulate(bench::sweep_scenario(k, off));
          r.coding_gain = bench::coding_gain(r.uncoded.bytes(), r.coded.bytes());
          r.control_fraction = bench::control_fraction(r.coded.bytes());
          reports.push_back(std::move(r));
        }
      }
      print_reports(reports);
      if (!sweep_report.empty()) {
        for (const auto& p : bench::emit_report(reports, sweep_report)) std::cerr << "wrote " << p << "\n";
      }
      for (const auto& r : reports) {
        if (!r.coded.fidelity || !r.coded.finished) return exit_runtime;
      }
      return exit_ok;
    }

    if (*report) {
      std::ifstream in(report_trace);
      if (!in) throw ConfigError("cannot open " + report_trace);
      std::ostringstream text;
      text << in.rdbuf();
      std::vector<netsim::TraceEvent> events;
      try {
        events = netsim::Trace::parse_json_lines(text.str());
      } catch (const Error& e) {
        std::cerr << "xcast: " << report_trace << ": " << e.what() << "\n";
        return exit_validation;
      }
      std::cout << bench::summarize_trace(events);
      return exit_ok;
    }
  } catch (const ConfigError& e) {
    std::cerr << "xcast: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "xcast: bad number: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::out_of_range& e) {
    std::cerr << "xcast: number out of range: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "xcast: " << e.what() << "\n";
    return exit_runtime;
  }
  return exit_ok;
}
