/* Copyright 2026 The vpki Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// vpki: operator entry point.
//
// Exit status: 0 success, 1 usage, 2 runtime error, 3 audit or assertion
// failure. --json switches every report to machine-readable output.
// VPKI_CONFIG names a JSON file with defaults (pki, scenario, out, seed,
// log, and the serve settings); flags override it.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>

#include "vpki/analysis.hpp"
#include "vpki/deployment.hpp"
#include "vpki/live.hpp"
#include "vpki/ltca.hpp"
#include "vpki/net.hpp"
#include "vpki/pca.hpp"
#include "vpki/resolution.hpp"
#include "vpki/services.hpp"
#include "vpki/simulator.hpp"

namespace fs = std::filesystem;
using namespace vpki;

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;
constexpr int kAudit = 3;

struct AuditFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  bool json = false;
  int verbose = 0;
  Json defaults = Json::object();

  std::string pick(const std::string& flag, const char* key) const {
    if (!flag.empty()) return flag;
    return defaults.value(key, std::string{});
  }
};

void emit(const Options& o, const Json& j, const std::string& text) {
  if (o.json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw CLI::ValidationError(what, "required");
  if (!fs::exists(path)) throw Error(ErrorCode::io_error, what + " not found: " + path);
}

// ---- sim ----

int sim_run(const Options& o, std::string scenario, std::optional<std::uint64_t> seed, std::string out) {
  scenario = o.pick(scenario, "scenario");
  out = o.pick(out, "out");
  require_file(scenario, "--scenario");
  if (out.empty()) throw CLI::ValidationError("--out", "required");
  auto spec = ScenarioSpec::load(scenario);
  if (seed) spec.seed = *seed;
  else if (o.defaults.contains("seed")) spec.seed = o.defaults.at("seed").get<std::uint64_t>();
  auto result = run_simulation(spec);
  result.write(out);
  emit(o, result.summary,
       "scenario " + spec.name + " seed " + std::to_string(spec.seed) + "\nrecords " +
           std::to_string(result.log.records()) + "\ndigest " + result.digest().hex() + "\n");
  return 0;
}

// ---- analyze ----

int analyze(const Options& o, const std::string& what, std::string log_dir, std::size_t shuffles,
            const std::string& expect, std::optional<std::size_t> expect_max) {
  log_dir = o.pick(log_dir, "log");
  require_file(log_dir, "--log");
  auto run = load_run(log_dir);
  bool ok = true;
  Json j;
  std::string text;
  if (what == "linkability") {
    auto r = linkability_report(run, shuffles);
    j = to_json(r);
    text = "requests " + std::to_string(r.requests) + " groups " + std::to_string(r.groups) + "\nprecision " +
           fmt(r.attack.precision) + " recall " + fmt(r.attack.recall) + "\nbaseline precision p2.5 " +
           fmt(r.baseline_precision.p2_5) + " p50 " + fmt(r.baseline_precision.p50) + " p95 " +
           fmt(r.baseline_precision.p95) + " p97.5 " + fmt(r.baseline_precision.p97_5) + "\n";
    if (expect == "above") ok = r.precision_above_p95;
    if (expect == "band") ok = r.precision_within_band;
  } else if (what == "sybil") {
    auto r = sybil_audit(run.truth);
    j = to_json(r);
    for (const auto& [v, m] : r.max_simultaneous) text += v + " " + std::to_string(m) + "\n";
    text += "max " + std::to_string(r.overall_max) + (r.worst_vehicle.empty() ? "" : " (" + r.worst_vehicle + ")") + "\n";
    if (expect_max) ok = r.overall_max == *expect_max;
  } else if (what == "roles") {
    auto r = role_separation_audit(run);
    j = to_json(r);
    bool planted = matches_planted(r, run.truth);
    j["matches_planted"] = planted;
    for (const auto& v : r.violations) text += v.side + " " + v.kind + " " + v.value + " in " + v.artifact + "\n";
    text += "violations " + std::to_string(r.violations.size()) + " planted " +
            std::to_string(run.truth.planted.size()) + (planted ? " (match)" : " (MISMATCH)") + "\n";
    ok = planted;
  } else if (what == "revocation") {
    auto r = revocation_window(run);
    j = to_json(r);
    for (const auto& v : r.vehicles) {
      text += v.vehicle_id + " " + v.order_id + " window " + fmt(v.window_s) + " s residual lifetime " +
              fmt(v.residual_lifetime_s) + " s\n";
    }
    text += "serials " + std::to_string(r.serials.size()) + " max " + fmt(r.max_window_s) + " s mean " +
            fmt(r.mean_window_s) + " s bound " + fmt(r.bound_s) + " s\n";
    if (expect == "bound") ok = r.max_window_s <= r.bound_s;
    if (expect == "residual") {
      for (const auto& v : r.vehicles) ok = ok && std::abs(v.window_s - v.residual_lifetime_s) <= r.residual_slack_s;
    }
  } else {
    throw CLI::ValidationError("analyze", "unknown analysis " + what);
  }
  emit(o, j, text);
  if (!ok) throw AuditFailure(what + " check failed");
  return 0;
}

// ---- bench ----

int bench(const Options& o, const std::string& what, std::uint32_t count, const std::string& mode,
          std::uint32_t reps, std::uint32_t vehicles, double rate, double duration) {
  if (what == "issuance") {
    IssuanceBenchConfig cfg;
    cfg.count = count;
    cfg.reps = reps;
    cfg.mode = mode == "proxy" ? AcquisitionMode::proxy : AcquisitionMode::token;
    auto r = bench_issuance(cfg);
    std::string text = "issuing " + std::to_string(count) + " pseudonyms, " + mode + " mode, " +
                       std::to_string(reps) + " reps, " + std::to_string(r.threads) + " threads\n" +
                       "median " + fmt(r.total.p50, 1) + " ms  p95 " + fmt(r.total.p95, 1) + " ms  token leg " +
                       fmt(r.token.p50, 1) + " ms\n" +
                       "reference: SR-VPKI 260 ms, SEROSA 650 ms, VeSPA 817 ms, PUCA 1000 ms\n";
    emit(o, to_json(r), text);
    return 0;
  }
  if (what == "beacons") {
    BeaconLoadConfig cfg{.vehicles = vehicles, .rate_hz = rate, .duration_s = duration};
    auto r = run_beacon_load(cfg);
    std::string text = std::to_string(vehicles) + " vehicles at " + fmt(rate, 1) + " Hz for " + fmt(duration, 0) +
                       " s: ticks " + std::to_string(r.ticks_run) + "/" + std::to_string(r.ticks_planned) +
                       " missed " + std::to_string(r.missed_deadlines) + "\nverifies/s needed " +
                       fmt(r.required_verifies_per_s, 0) + " achieved " + fmt(r.achieved_verifies_per_s, 0) + "\n";
    emit(o, to_json(r), text);
    if (r.missed_deadlines > 0) throw AuditFailure("missed deadlines");
    return 0;
  }
  throw CLI::ValidationError("bench", "unknown benchmark " + what);
}

// ---- authorities from a run directory ----

struct Restored {
  Deployment dep;
  ScenarioSpec spec;
  std::map<std::string, std::unique_ptr<Ltca>> ltcas;
  std::map<std::string, std::unique_ptr<Pca>> pcas;
  std::unique_ptr<ResolutionAuthority> ra;
  Timestamp now = 0;
};

std::unique_ptr<Ltca> make_ltca(const Deployment& dep, const std::string& id, bool period_ledger) {
  LtcaConfig cfg;
  cfg.policy = dep.policy;
  cfg.period_ledger = period_ledger;
  return std::make_unique<Ltca>(dep.certificate(id), dep.key(id), cfg, dep.trust_store, std::make_unique<SystemRandom>());
}

std::unique_ptr<Pca> make_pca(const Deployment& dep, const std::string& id, LifetimeMode mode, bool binding) {
  PcaConfig cfg;
  cfg.policy = dep.policy;
  cfg.mode = mode;
  cfg.enforce_binding = binding;
  return std::make_unique<Pca>(dep.certificate(id), dep.key(id), cfg, dep.trust_store, std::make_unique<SystemRandom>());
}

Restored restore_run(const std::string& dir) {
  Restored r;
  fs::path root(dir);
  r.dep = Deployment::load((root / "pki").string());
  r.spec = ScenarioSpec::load((root / "scenario.json").string());
  r.now = r.spec.start_time + static_cast<Timestamp>(std::ceil(r.spec.duration_s));
  Clock clock = [&r] { return r.now; };
  r.ra = std::make_unique<ResolutionAuthority>(r.dep.certificate(r.dep.ra_id), r.dep.key(r.dep.ra_id), r.dep.trust_store);
  for (const auto& id : r.dep.ltca_ids) {
    auto l = make_ltca(r.dep, id, r.spec.guards);
    l->restore_state(read_file((root / "state" / ("ltca-" + id + ".bin")).string()));
    r.ra->add_ltca(id, std::make_shared<LocalLtcaLink>(*l, clock));
    r.ltcas[id] = std::move(l);
  }
  for (const auto& id : r.dep.pca_ids) {
    auto p = make_pca(r.dep, id, r.spec.lifetime_mode, r.spec.guards);
    p->restore_state(read_file((root / "state" / ("pca-" + id + ".bin")).string()));
    r.ra->add_pca(id, std::make_shared<LocalPcaLink>(*p, clock));
    r.pcas[id] = std::move(p);
  }
  r.ra->restore_state(read_file((root / "state" / ("ra-" + r.dep.ra_id + ".bin")).string()));
  return r;
}

Json order_json(const ResolutionOrder& o) {
  Json j = {{"order_id", o.order_id},
            {"pseudonym", o.pseudonym_serial.hex()},
            {"pca", o.pca_id},
            {"justification", o.justification},
            {"state", std::string(to_string(o.state))},
            {"created_at", o.created_at},
            {"vehicle", o.vehicle_id},
            {"ltca", o.ltca_id},
            {"revocation_triggered", o.revocation_triggered}};
  if (o.token_serial) j["token"] = o.token_serial->hex();
  return j;
}

int resolve(const Options& o, const std::string& serial_hex, std::string log_dir, const std::string& justification) {
  log_dir = o.pick(log_dir, "log");
  require_file(log_dir, "--log");
  auto serial = Serial::from_hex(serial_hex);
  std::optional<Pseudonym> pseudonym;
  for (const auto& e : EventLog::read((fs::path(log_dir) / "events.ndjson").string())) {
    if (e.value("type", "") == "pseudonym-seen" && e.value("serial", "") == serial.hex()) {
      auto cred = decode_file(from_hex(e.at("pseudonym").get<std::string>()));
      pseudonym = std::get<Pseudonym>(cred);
      break;
    }
  }
  if (!pseudonym) throw Error(ErrorCode::unknown_pseudonym, "no beacon in this run carried " + serial.hex());
  // Works on in-memory copies; the run directory is left untouched.
  auto r = restore_run(log_dir);
  auto order = r.ra->resolve(*pseudonym, justification, r.now);
  emit(o, order_json(order), "vehicle " + order.vehicle_id + "\norder " + order.order_id + " (" +
                                 std::string(to_string(order.state)) + ") token " + order.token_serial->hex() +
                                 " via " + order.pca_id + " and " + order.ltca_id + "\n");
  return 0;
}

// ---- crl / cred ----

Json credential_json(const Credential& c) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Crl>) {
          Json s = Json::array();
          for (const auto& v : x.revoked_serials) s.push_back(v.hex());
          return {{"type", "crl"}, {"issuer", x.issuer_id}, {"sequence", x.sequence_number},
                  {"issued_at", x.issued_at}, {"serials", s}};
        } else if constexpr (std::is_same_v<T, Pseudonym>) {
          return {{"type", "pseudonym"}, {"serial", x.serial.hex()}, {"issuer", x.issuer_id},
                  {"validity", {x.validity.start, x.validity.end}}};
        } else if constexpr (std::is_same_v<T, Token>) {
          return {{"type", "token"}, {"serial", x.serial.hex()}, {"issuer", x.issuer_id},
                  {"period_tag", x.period_tag}, {"validity", {x.validity.start, x.validity.end}}};
        } else if constexpr (std::is_same_v<T, LongTermCertificate>) {
          return {{"type", "ltc"}, {"serial", x.serial.hex()}, {"vehicle", x.vehicle_id}, {"issuer", x.issuer_id},
                  {"validity", {x.validity.start, x.validity.end}}};
        } else if constexpr (std::is_same_v<T, AuthorityCertificate>) {
          return {{"type", "authority"}, {"id", x.authority_id}, {"role", std::string(to_string(x.role))},
                  {"issuer", x.issuer_id}, {"validity", {x.validity.start, x.validity.end}}};
        } else {
          return {{"type", "policy"}, {"issuer", x.issuer_id}, {"epoch_origin", x.epoch_origin},
                  {"slot_duration", x.slot_duration}, {"period_length", x.period_length}};
        }
      },
      c);
}

int cred_inspect(const Options& o, const std::string& file) {
  require_file(file, "file");
  auto c = decode_file(read_file(file));
  emit(o, credential_json(c), describe(c) + "\n");
  return 0;
}

int crl_show(const Options& o, const std::string& issuer, std::string log_dir, const std::string& file) {
  std::string path = file;
  if (path.empty()) {
    log_dir = o.pick(log_dir, "log");
    path = (fs::path(log_dir) / "crl" / (issuer + ".crl")).string();
  }
  require_file(path, "CRL");
  auto c = decode_file(read_file(path));
  if (!std::holds_alternative<Crl>(c)) throw Error(ErrorCode::decode_error, path + " is not a CRL");
  emit(o, credential_json(c), describe(c) + "\n");
  return 0;
}

int pki_init(const Options& o, const std::string& out, std::uint32_t k, std::uint32_t l, std::uint32_t m,
             std::int64_t slot, std::int64_t period) {
  if (out.empty()) throw CLI::ValidationError("--out", "required");
  SystemRandom rng;
  LifetimePolicy tmpl;
  tmpl.slot_duration = slot;
  tmpl.period_length = period;
  const Timestamp now = std::time(nullptr);
  auto dep = Deployment::build(TrustTopology{k, l, m, {}}, tmpl, now - 86400, now + 10 * 365 * 86400LL, rng);
  dep.save(out);
  Json ids = {{"rca", dep.rca_id}, {"ra", dep.ra_id}, {"hca", dep.hca_ids}, {"ltca", dep.ltca_ids}, {"pca", dep.pca_ids}};
  emit(o, ids, "wrote " + out + ": " + ids.dump() + "\n");
  return 0;
}

// ---- serve ----

std::atomic<TcpServer*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

FrameChannel peer_channel(const std::string& address, std::vector<std::unique_ptr<TcpClient>>& keep) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::invalid_request, "peer address needs host:port: " + address);
  keep.push_back(std::make_unique<TcpClient>(address.substr(0, colon),
                                             static_cast<std::uint16_t>(std::stoi(address.substr(colon + 1)))));
  return keep.back()->channel();
}

int serve(const Options& o, const std::string& role, std::string config_path) {
  config_path = o.pick(config_path, "serve_config");
  Json cfg = o.defaults;
  if (!config_path.empty()) {
    require_file(config_path, "--config");
    std::ifstream in(config_path);
    cfg = Json::parse(in);
  }
  auto pki = cfg.value("pki", std::string{});
  require_file(pki, "pki");
  auto dep = Deployment::load(pki);
  auto host = cfg.value("host", std::string("127.0.0.1"));
  auto port = cfg.value("port", 0);
  auto state_path = cfg.value("state", std::string{});
  auto mode = lifetime_mode_from_string(cfg.value("lifetime_mode", std::string("grid")));
  const auto now = [] { return static_cast<Timestamp>(std::time(nullptr)); };

  std::mutex mu;
  std::function<Bytes(ByteView)> handler;
  std::function<Bytes()> snapshot;
  std::unique_ptr<Ltca> ltca;
  std::unique_ptr<Pca> pca;
  std::unique_ptr<ResolutionAuthority> ra;
  std::unique_ptr<Service> service;
  std::vector<std::unique_ptr<TcpClient>> peers;
  std::string id;

  if (role == "ltca") {
    id = cfg.value("authority", dep.ltca_ids.front());
    ltca = make_ltca(dep, id, true);
    if (!state_path.empty() && fs::exists(state_path)) ltca->restore_state(read_file(state_path));
    service = std::make_unique<LtcaService>(*ltca, std::make_unique<SystemRandom>());
    snapshot = [&] { return ltca->serialize_state(); };
  } else if (role == "pca") {
    id = cfg.value("authority", dep.pca_ids.front());
    pca = make_pca(dep, id, mode, true);
    if (!state_path.empty() && fs::exists(state_path)) pca->restore_state(read_file(state_path));
    service = std::make_unique<PcaService>(*pca, std::make_unique<SystemRandom>());
    snapshot = [&] { return pca->serialize_state(); };
  } else if (role == "ra") {
    id = dep.ra_id;
    ra = std::make_unique<ResolutionAuthority>(dep.certificate(id), dep.key(id), dep.trust_store);
    for (const auto& [peer, address] : cfg.value("links", Json::object()).items()) {
      auto channel = peer_channel(address.get<std::string>(), peers);
      auto key = dep.certificate(peer).public_key;
      if (dep.certificate(peer).role == Role::pca) {
        ra->add_pca(peer, std::make_shared<RemotePcaLink>(channel, key, std::make_unique<SystemRandom>()));
      } else {
        ra->add_ltca(peer, std::make_shared<RemoteLtcaLink>(channel, key, std::make_unique<SystemRandom>()));
      }
    }
    if (!state_path.empty() && fs::exists(state_path)) ra->restore_state(read_file(state_path));
    if (!state_path.empty()) ra->set_journal([state_path](const Bytes& b) { write_file(state_path, b); });
    service = std::make_unique<RaService>(*ra, dep.key(id).private_key, std::make_unique<SystemRandom>());
    snapshot = [&] { return ra->serialize_state(); };
  } else {
    throw CLI::ValidationError("serve", "role must be ltca, pca or ra");
  }
  handler = [&](ByteView frame) {
    std::lock_guard lock(mu);
    auto reply = service->handle(frame, now());
    if (!state_path.empty()) write_file(state_path, snapshot());
    return reply;
  };

  TcpServer server(handler, static_cast<std::uint16_t>(port), host);
  std::cerr << id << " listening on " << host << ":" << server.port() << std::endl;
  if (o.json) std::cout << Json{{"authority", id}, {"host", host}, {"port", server.port()}}.dump() << std::endl;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.serve_forever();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vpki: vehicular PKI authorities, simulation and audits"};
  app.require_subcommand(1);
  Options opts;
  app.add_option("--config", opts.config, "JSON defaults file")->envname("VPKI_CONFIG");
  app.add_flag("--json", opts.json, "machine-readable output");
  app.add_flag("-v,--verbose", opts.verbose, "more output");

  // sim run
  auto* sim = app.add_subcommand("sim", "scenario execution");
  sim->require_subcommand(1);
  auto* sim_run_cmd = sim->add_subcommand("run", "run a scenario and write its event log");
  std::string scenario, out;
  std::optional<std::uint64_t> seed;
  sim_run_cmd->add_option("--scenario", scenario, "scenario JSON");
  sim_run_cmd->add_option("--seed", seed, "override the scenario seed");
  sim_run_cmd->add_option("--out", out, "output directory");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run an authority on a local port");
  std::string serve_role, serve_config;
  serve_cmd->add_option("role", serve_role, "ltca, pca or ra")->required();
  serve_cmd->add_option("--config", serve_config, "service config JSON (pki, authority, host, port, state, links)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "wall-clock benchmarks");
  std::string bench_what = "issuance", bench_mode = "token";
  std::uint32_t count = 100, reps = 10, load_vehicles = 50;
  double load_rate = 10, load_duration = 60;
  bench_cmd->add_option("what", bench_what, "issuance or beacons")->check(CLI::IsMember({"issuance", "beacons"}));
  bench_cmd->add_option("--count", count, "pseudonyms per request");
  bench_cmd->add_option("--mode", bench_mode, "token or proxy")->check(CLI::IsMember({"token", "proxy"}));
  bench_cmd->add_option("--reps", reps, "repetitions");
  bench_cmd->add_option("--vehicles", load_vehicles, "beacon load: vehicles");
  bench_cmd->add_option("--rate", load_rate, "beacon load: beacons per second per vehicle");
  bench_cmd->add_option("--duration", load_duration, "beacon load: seconds");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "audits over a run directory");
  std::string analysis, log_dir, expect;
  std::size_t shuffles = 1000;
  std::optional<std::size_t> expect_max;
  analyze_cmd->add_option("analysis", analysis, "linkability, sybil, roles or revocation")
      ->required()
      ->check(CLI::IsMember({"linkability", "sybil", "roles", "revocation"}));
  analyze_cmd->add_option("--log", log_dir, "run directory written by sim run");
  analyze_cmd->add_option("--shuffles", shuffles, "baseline label shuffles (linkability)");
  analyze_cmd->add_option("--expect", expect, "linkability: above|band; revocation: bound|residual");
  analyze_cmd->add_option("--expect-max", expect_max, "sybil: expected overall maximum");

  // resolve
  auto* resolve_cmd = app.add_subcommand("resolve", "resolve a pseudonym to its vehicle");
  std::string pseudonym_hex, justification = "operator request";
  resolve_cmd->add_option("--pseudonym", pseudonym_hex, "pseudonym serial (hex)")->required();
  resolve_cmd->add_option("--log", log_dir, "run directory");
  resolve_cmd->add_option("--justification", justification);

  // crl show
  auto* crl_cmd = app.add_subcommand("crl", "revocation lists");
  crl_cmd->require_subcommand(1);
  auto* crl_show_cmd = crl_cmd->add_subcommand("show", "print a CRL");
  std::string issuer, crl_file;
  crl_show_cmd->add_option("--issuer", issuer, "issuing authority id");
  crl_show_cmd->add_option("--log", log_dir, "run directory");
  crl_show_cmd->add_option("--file", crl_file, "CRL file");

  // cred inspect
  auto* cred_cmd = app.add_subcommand("cred", "credential files");
  cred_cmd->require_subcommand(1);
  auto* inspect_cmd = cred_cmd->add_subcommand("inspect", "print a credential file");
  std::string cred_file;
  inspect_cmd->add_option("file", cred_file)->required();

  // pki init
  auto* pki_cmd = app.add_subcommand("pki", "deployment material");
  pki_cmd->require_subcommand(1);
  auto* init_cmd = pki_cmd->add_subcommand("init", "create a trust store, policy and authority keys");
  std::uint32_t k = 1, l = 1, m = 1;
  std::int64_t slot = 600, period = 86400;
  std::string pki_out;
  init_cmd->add_option("--out", pki_out)->required();
  init_cmd->add_option("--hca", k);
  init_cmd->add_option("--ltca", l);
  init_cmd->add_option("--pca", m);
  init_cmd->add_option("--slot", slot, "pseudonym lifetime, seconds");
  init_cmd->add_option("--period", period, "token period, seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (!opts.config.empty()) {
      require_file(opts.config, "--config");
      std::ifstream in(opts.config);
      opts.defaults = Json::parse(in);
    }
    if (sim_run_cmd->parsed()) return sim_run(opts, scenario, seed, out);
    if (serve_cmd->parsed()) return serve(opts, serve_role, serve_config);
    if (bench_cmd->parsed()) {
      return bench(opts, bench_what, count, bench_mode, reps, load_vehicles, load_rate, load_duration);
    }
    if (analyze_cmd->parsed()) return analyze(opts, analysis, log_dir, shuffles, expect, expect_max);
    if (resolve_cmd->parsed()) return resolve(opts, pseudonym_hex, log_dir, justification);
    if (crl_show_cmd->parsed()) return crl_show(opts, issuer, log_dir, crl_file);
    if (inspect_cmd->parsed()) return cred_inspect(opts, cred_file);
    if (init_cmd->parsed()) return pki_init(opts, pki_out, k, l, m, slot, period);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kUsage;
  } catch (const AuditFailure& e) {
    std::cerr << "audit failed: " << e.what() << "\n";
    return kAudit;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
