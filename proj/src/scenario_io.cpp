#include "gridroute/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

namespace gridroute {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioParseError(where + ": " + what);
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(where, "unknown key '" + key + "'");
    }
  }
}

const json& required(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing required key '") + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, where + "." + key);
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

int integer_or(const json& j, const char* key, int fallback, const std::string& where) {
  auto it = j.find(key);
  return it == j.end() ? fallback : integer(*it, where + "." + key);
}

bool boolean_or(const json& j, const char* key, bool fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) fail(where + "." + key, "expected true or false");
  return it->get<bool>();
}

Series series(const json& j, const std::string& where) {
  if (j.is_number()) return Series::of(j.get<double>());
  if (!j.is_array()) fail(where, "expected a number or an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return Series::of(std::move(v));
}

json series_json(const Series& s) {
  if (s.constant) return s.values.empty() ? json(0.0) : json(s.values.front());
  return json(s.values);
}

int bus_index(const json& j, const std::string& where) {
  if (j.is_number_integer()) return j.get<int>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'Z') return s[0] - 'A';
  }
  fail(where, "bus must be a letter A-Z or an index");
}

std::vector<Attachment> attachments(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of [port, bus] pairs");
  std::vector<Attachment> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 2) fail(w, "expected [port, bus]");
    out.push_back({integer(j[i][0], w), bus_index(j[i][1], w)});
  }
  return out;
}

Device device_from_json(const json& j, const std::string& where) {
  check_keys(j, {"kind", "max_power_w", "capacity_wh", "soc_min", "soc_max", "renewable"}, where);
  const json& kind = required(j, "kind", where);
  if (!kind.is_string()) fail(where + ".kind", "expected a device kind name");
  Device d;
  try {
    d = make_device(device_kind_from_string(kind.get<std::string>()), 0.0);
  } catch (const std::invalid_argument& e) {
    fail(where + ".kind", e.what());
  }
  d.max_power_w = number_or(j, "max_power_w", 0.0, where);
  d.capacity_wh = number_or(j, "capacity_wh", 0.0, where);
  d.soc_min = number_or(j, "soc_min", 0.0, where);
  d.soc_max = number_or(j, "soc_max", 1.0, where);
  d.renewable = boolean_or(j, "renewable", d.renewable, where);
  return d;
}

json device_to_json(const Device& d) {
  json j{{"kind", to_string(d.kind)}, {"max_power_w", d.max_power_w}, {"renewable", d.renewable}};
  if (is_storage(d.kind) || d.capacity_wh != 0.0) {
    j["capacity_wh"] = d.capacity_wh;
    j["soc_min"] = d.soc_min;
    j["soc_max"] = d.soc_max;
  }
  return j;
}

CommunityAssets assets_from_json(const json& j, const std::string& where) {
  check_keys(j, {"port", "battery", "electrolyzer", "fuel_cell", "hydrogen"}, where);
  CommunityAssets a;
  a.port_id = integer_or(j, "port", 0, where);
  if (auto it = j.find("battery"); it != j.end()) {
    const std::string w = where + ".battery";
    check_keys(*it, {"capacity_wh", "max_charge_w", "max_discharge_w", "soc", "soc_min", "soc_max",
                     "charge_efficiency", "renewable_fraction"},
               w);
    auto& b = a.battery;
    b.capacity_wh = number_or(*it, "capacity_wh", 0.0, w);
    b.max_charge_w = number_or(*it, "max_charge_w", 0.0, w);
    b.max_discharge_w = number_or(*it, "max_discharge_w", 0.0, w);
    b.soc_min = number_or(*it, "soc_min", 0.0, w);
    b.soc_max = number_or(*it, "soc_max", 1.0, w);
    b.soc = number_or(*it, "soc", b.soc_min, w);
    b.charge_efficiency = number_or(*it, "charge_efficiency", 1.0, w);
    b.renewable_fraction = number_or(*it, "renewable_fraction", 0.0, w);
  } else {
    a.battery.soc = 0.0;
  }
  if (auto it = j.find("electrolyzer"); it != j.end()) {
    const std::string w = where + ".electrolyzer";
    check_keys(*it, {"max_input_w", "efficiency", "lhv_wh_per_kg"}, w);
    a.electrolyzer.max_input_w = number_or(*it, "max_input_w", 0.0, w);
    a.electrolyzer.efficiency = number_or(*it, "efficiency", a.electrolyzer.efficiency, w);
    a.electrolyzer.lhv_wh_per_kg = number_or(*it, "lhv_wh_per_kg", a.electrolyzer.lhv_wh_per_kg, w);
  }
  if (auto it = j.find("fuel_cell"); it != j.end()) {
    const std::string w = where + ".fuel_cell";
    check_keys(*it, {"max_output_w", "efficiency"}, w);
    a.fuel_cell.max_output_w = number_or(*it, "max_output_w", 0.0, w);
    a.fuel_cell.efficiency = number_or(*it, "efficiency", a.fuel_cell.efficiency, w);
  }
  if (auto it = j.find("hydrogen"); it != j.end()) {
    const std::string w = where + ".hydrogen";
    check_keys(*it, {"total_kg", "renewable_kg"}, w);
    a.hydrogen.total_kg = number_or(*it, "total_kg", 0.0, w);
    a.hydrogen.renewable_kg = number_or(*it, "renewable_kg", 0.0, w);
  }
  return a;
}

json roles_json(const std::map<int, PortRole>& roles) {
  json j = json::object();
  for (const auto& [p, r] : roles) j[std::to_string(p)] = to_string(r);
  return j;
}

PortRole role_from_string(const std::string& s) {
  if (s == "forming") return PortRole::Forming;
  if (s == "following") return PortRole::Following;
  return PortRole::Idle;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_number(const std::string& s) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

std::vector<json> read_ndjson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

}  // namespace

std::string format_number(double x) { return format_watts(x); }

MatrixLayout layout_from_json(const json& j) {
  if (j.is_string()) {
    try {
      return MatrixLayout::named(j.get<std::string>());
    } catch (const std::exception& e) {
      fail("layout", e.what());
    }
  }
  check_keys(j, {"name", "n_ports", "n_buses", "switches", "hardwires"}, "layout");
  std::string name = "custom";
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) fail("layout.name", "expected a string");
    name = it->get<std::string>();
  }
  const int n_ports = integer(required(j, "n_ports", "layout"), "layout.n_ports");
  const int n_buses = integer(required(j, "n_buses", "layout"), "layout.n_buses");
  auto sw = j.contains("switches") ? attachments(j["switches"], "layout.switches") : std::vector<Attachment>{};
  auto hw = j.contains("hardwires") ? attachments(j["hardwires"], "layout.hardwires") : std::vector<Attachment>{};
  try {
    return MatrixLayout(name, n_ports, n_buses, std::move(sw), std::move(hw));
  } catch (const std::invalid_argument& e) {
    fail("layout", e.what());
  }
}

Scenario scenario_from_json(const json& doc) {
  check_keys(doc, {"name", "steps", "step_duration_s", "seed", "layout", "houses", "assets", "priorities",
                   "prices", "flags", "manual_routes"},
             "scenario");
  Scenario sc;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) fail("name", "expected a string");
    sc.name = it->get<std::string>();
  }
  sc.layout = layout_from_json(required(doc, "layout", "scenario"));
  sc.step_duration_s = number_or(doc, "step_duration_s", 60.0, "scenario");
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    sc.seed = it->get<std::uint64_t>();
  }

  const json& houses = required(doc, "houses", "scenario");
  if (!houses.is_array()) fail("houses", "expected an array");
  std::size_t longest = 0;
  for (std::size_t i = 0; i < houses.size(); ++i) {
    const std::string w = "houses[" + std::to_string(i) + "]";
    const json& h = houses[i];
    check_keys(h, {"id", "port", "devices", "generation_w", "demand_w", "jitter_w"}, w);
    HouseScenario hs;
    hs.profile.house_id = integer(required(h, "id", w), w + ".id");
    hs.profile.port_id = integer(required(h, "port", w), w + ".port");
    if (auto it = h.find("devices"); it != h.end()) {
      if (!it->is_array()) fail(w + ".devices", "expected an array");
      for (std::size_t d = 0; d < it->size(); ++d) {
        hs.profile.devices.push_back(device_from_json((*it)[d], w + ".devices[" + std::to_string(d) + "]"));
      }
    }
    if (h.contains("generation_w")) hs.generation_w = series(h["generation_w"], w + ".generation_w");
    if (h.contains("demand_w")) hs.demand_w = series(h["demand_w"], w + ".demand_w");
    hs.jitter_w = number_or(h, "jitter_w", 0.0, w);
    for (const Series* s : {&hs.generation_w, &hs.demand_w}) {
      if (!s->constant) longest = std::max(longest, s->values.size());
    }
    sc.houses.push_back(std::move(hs));
  }

  if (auto it = doc.find("assets"); it != doc.end()) {
    sc.assets = assets_from_json(*it, "assets");
  } else {
    sc.assets.battery.soc = 0.0;
  }

  if (auto it = doc.find("priorities"); it != doc.end()) {
    if (!it->is_array()) fail("priorities", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string w = "priorities[" + std::to_string(i) + "]";
      const json& p = (*it)[i];
      check_keys(p, {"port", "rank", "demand_w"}, w);
      PriorityEntry e;
      e.port = integer(required(p, "port", w), w + ".port");
      e.rank = integer(required(p, "rank", w), w + ".rank");
      if (p.contains("demand_w")) e.demand_w = number(p["demand_w"], w + ".demand_w");
      sc.priorities.push_back(e);
    }
  }

  if (auto it = doc.find("prices"); it != doc.end()) {
    check_keys(*it, {"trade_per_kwh"}, "prices");
    if (it->contains("trade_per_kwh")) sc.price_per_kwh = series((*it)["trade_per_kwh"], "prices.trade_per_kwh");
    if (!sc.price_per_kwh.constant) longest = std::max(longest, sc.price_per_kwh.values.size());
  }

  if (auto it = doc.find("flags"); it != doc.end()) {
    check_keys(*it, {"emergency_steps", "renewable_only_p2g", "fc_inherits_renewable"}, "flags");
    if (auto e = it->find("emergency_steps"); e != it->end()) {
      if (!e->is_array()) fail("flags.emergency_steps", "expected an array of step indices");
      for (const auto& s : *e) sc.emergency_steps.insert(integer(s, "flags.emergency_steps"));
    }
    sc.renewable_only_p2g = boolean_or(*it, "renewable_only_p2g", false, "flags");
    sc.fc_inherits_renewable = boolean_or(*it, "fc_inherits_renewable", true, "flags");
  }

  if (auto it = doc.find("manual_routes"); it != doc.end()) {
    if (!it->is_array()) fail("manual_routes", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string w = "manual_routes[" + std::to_string(i) + "]";
      const json& r = (*it)[i];
      check_keys(r, {"step", "pairs"}, w);
      const int step = integer(required(r, "step", w), w + ".step");
      const json& pairs = required(r, "pairs", w);
      if (!pairs.is_array()) fail(w + ".pairs", "expected an array of [port, port]");
      auto& dst = sc.manual_routes[step];
      for (const auto& pr : pairs) {
        if (!pr.is_array() || pr.size() != 2) fail(w + ".pairs", "expected [port, port]");
        dst.emplace_back(integer(pr[0], w + ".pairs"), integer(pr[1], w + ".pairs"));
      }
    }
  }

  if (auto it = doc.find("steps"); it != doc.end()) {
    sc.steps = integer(*it, "steps");
  } else {
    sc.steps = longest > 0 ? static_cast<int>(longest) : 1;
  }
  return sc;
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioParseError(std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(doc);
}

Scenario load_scenario(const std::string& path_or_builtin) {
  std::ifstream in(path_or_builtin);
  if (!in) {
    if (path_or_builtin == "modeAB") return mode_ab_scenario();
    throw ScenarioParseError("cannot open scenario '" + path_or_builtin + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

json scenario_to_json(const Scenario& sc) {
  json layout;
  const std::string& n = sc.layout.name();
  if (n == "prototype4" || n == "full4x2" || (n.rfind("star", 0) == 0 && n.size() > 4)) {
    layout = n;
  } else {
    json sw = json::array(), hw = json::array();
    for (const auto& a : sc.layout.switches()) sw.push_back({a.port, bus_name(a.bus)});
    for (const auto& a : sc.layout.hardwires()) hw.push_back({a.port, bus_name(a.bus)});
    layout = {{"name", n}, {"n_ports", sc.layout.n_ports()}, {"n_buses", sc.layout.n_buses()}, {"switches", sw},
              {"hardwires", hw}};
  }
  json houses = json::array();
  for (const auto& h : sc.houses) {
    json devices = json::array();
    for (const auto& d : h.profile.devices) devices.push_back(device_to_json(d));
    houses.push_back({{"id", h.profile.house_id},
                      {"port", h.profile.port_id},
                      {"devices", devices},
                      {"generation_w", series_json(h.generation_w)},
                      {"demand_w", series_json(h.demand_w)},
                      {"jitter_w", h.jitter_w}});
  }
  const auto& a = sc.assets;
  json assets{{"port", a.port_id},
              {"battery",
               {{"capacity_wh", a.battery.capacity_wh},
                {"max_charge_w", a.battery.max_charge_w},
                {"max_discharge_w", a.battery.max_discharge_w},
                {"soc", a.battery.soc},
                {"soc_min", a.battery.soc_min},
                {"soc_max", a.battery.soc_max},
                {"charge_efficiency", a.battery.charge_efficiency},
                {"renewable_fraction", a.battery.renewable_fraction}}},
              {"electrolyzer",
               {{"max_input_w", a.electrolyzer.max_input_w},
                {"efficiency", a.electrolyzer.efficiency},
                {"lhv_wh_per_kg", a.electrolyzer.lhv_wh_per_kg}}},
              {"fuel_cell", {{"max_output_w", a.fuel_cell.max_output_w}, {"efficiency", a.fuel_cell.efficiency}}},
              {"hydrogen", {{"total_kg", a.hydrogen.total_kg}, {"renewable_kg", a.hydrogen.renewable_kg}}}};
  json prios = json::array();
  for (const auto& p : sc.priorities) {
    json e{{"port", p.port}, {"rank", p.rank}};
    if (p.demand_w) e["demand_w"] = *p.demand_w;
    prios.push_back(e);
  }
  json routes = json::array();
  for (const auto& [step, pairs] : sc.manual_routes) {
    json ps = json::array();
    for (const auto& [x, y] : pairs) ps.push_back({x, y});
    routes.push_back({{"step", step}, {"pairs", ps}});
  }
  return {{"name", sc.name},
          {"steps", sc.steps},
          {"step_duration_s", sc.step_duration_s},
          {"seed", sc.seed},
          {"layout", layout},
          {"houses", houses},
          {"assets", assets},
          {"priorities", prios},
          {"prices", {{"trade_per_kwh", series_json(sc.price_per_kwh)}}},
          {"flags",
           {{"emergency_steps", std::vector<int>(sc.emergency_steps.begin(), sc.emergency_steps.end())},
            {"renewable_only_p2g", sc.renewable_only_p2g},
            {"fc_inherits_renewable", sc.fc_inherits_renewable}}},
          {"manual_routes", routes}};
}

json to_json(const DispatchPlan& plan, const MatrixLayout& layout) {
  json pairings = json::array();
  for (const auto& p : plan.pairings) {
    pairings.push_back(
        {{"from", p.source_port}, {"to", p.sink_port}, {"power_w", p.power_w}, {"renewable_share", p.renewable_share}});
  }
  json inputs = json::array();
  for (const auto& s : plan.storage_inputs) {
    inputs.push_back({{"from", s.source_port},
                      {"battery_w", s.battery_w},
                      {"p2g_w", s.p2g_w},
                      {"renewable_share", s.renewable_share}});
  }
  auto amounts = [](const std::vector<PortAmount>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back({{"port", x.port_id}, {"power_w", x.power_w}});
    return a;
  };
  json states = json::array();
  json names = json::array();
  for (std::size_t i = 0; i < plan.switch_states.closed.size(); ++i) {
    states.push_back(plan.switch_states.closed[i] ? "ON" : "OFF");
    if (i < layout.switches().size()) names.push_back(switch_name(layout.switches()[i]));
  }
  return {{"step", plan.step_index},
          {"mode", to_string(plan.mode)},
          {"pairings", pairings},
          {"battery_command_w", plan.battery_command_w},
          {"p2g_input_w", plan.p2g_input_w},
          {"fc_output_w", plan.fc_output_w},
          {"storage_inputs", inputs},
          {"grid_import", amounts(plan.grid_import)},
          {"spill", amounts(plan.spill)},
          {"served_ports", plan.served_ports},
          {"blocked_ports", plan.blocked_ports},
          {"dropped", plan.dropped},
          {"switches", names},
          {"switch_states", states},
          {"roles", roles_json(plan.roles)}};
}

DispatchPlan plan_from_json(const json& j) {
  DispatchPlan plan;
  plan.step_index = j.at("step").get<int>();
  plan.mode = j.at("mode").get<std::string>() == "emergency" ? PlanMode::Emergency : PlanMode::Normal;
  for (const auto& p : j.at("pairings")) {
    plan.pairings.push_back({p.at("from").get<int>(), p.at("to").get<int>(), p.at("power_w").get<double>(),
                             p.at("renewable_share").get<double>()});
  }
  plan.battery_command_w = j.at("battery_command_w").get<double>();
  plan.p2g_input_w = j.at("p2g_input_w").get<double>();
  plan.fc_output_w = j.at("fc_output_w").get<double>();
  for (const auto& s : j.at("storage_inputs")) {
    plan.storage_inputs.push_back({s.at("from").get<int>(), s.at("battery_w").get<double>(),
                                   s.at("p2g_w").get<double>(), s.at("renewable_share").get<double>()});
  }
  for (const auto& g : j.at("grid_import")) plan.grid_import.push_back({g.at("port"), g.at("power_w")});
  for (const auto& s : j.at("spill")) plan.spill.push_back({s.at("port"), s.at("power_w")});
  plan.served_ports = j.at("served_ports").get<std::vector<int>>();
  plan.blocked_ports = j.at("blocked_ports").get<std::vector<int>>();
  plan.dropped = j.at("dropped").get<std::vector<std::string>>();
  for (const auto& s : j.at("switch_states")) plan.switch_states.closed.push_back(s.get<std::string>() == "ON");
  for (const auto& [k, v] : j.at("roles").items()) plan.roles[std::stoi(k)] = role_from_string(v.get<std::string>());
  return plan;
}

void write_flows_csv(std::ostream& os, const SimulationResult& result) {
  os << "step,port,power_w,served\n";
  for (const auto& s : result.steps) {
    for (const auto& f : s.flows.flows) {
      os << s.step_index << ',' << f.port_id << ',' << format_number(f.power_w) << ',' << (f.served ? 1 : 0) << '\n';
    }
  }
}

void write_plans_ndjson(std::ostream& os, const SimulationResult& result, const MatrixLayout& layout) {
  for (const auto& s : result.steps) {
    json j = to_json(s.plan, layout);
    j["price_per_kwh"] = s.price_per_kwh;
    j["balance_residual_w"] = s.balance_residual_w;
    j["battery_soc"] = s.battery_soc;
    json v = json::array();
    for (const auto& x : s.violations) {
      v.push_back({{"severity", x.severity == Severity::Error ? "error" : "warning"},
                   {"code", x.code},
                   {"message", x.message},
                   {"ports", x.ports}});
    }
    j["violations"] = v;
    os << j.dump() << '\n';
  }
}

void write_ledger_ndjson(std::ostream& os, const LedgerState& ledger) {
  // Merge the three record streams by step; within a step: trades, batches, draws.
  const auto& t = ledger.trades();
  const auto& b = ledger.batches();
  const auto& d = ledger.draws();
  std::size_t ti = 0, bi = 0, di = 0;
  while (ti < t.size() || bi < b.size() || di < d.size()) {
    int step = std::numeric_limits<int>::max();
    if (ti < t.size()) step = std::min(step, t[ti].step_index);
    if (bi < b.size()) step = std::min(step, b[bi].step_index);
    if (di < d.size()) step = std::min(step, d[di].step_index);
    for (; ti < t.size() && t[ti].step_index == step; ++ti) {
      const auto& r = t[ti];
      os << json{{"type", "trade"},          {"step", r.step_index},
                 {"from", r.from_port},      {"to", r.to_port},
                 {"energy_wh", r.energy_wh}, {"price_per_kwh", r.price_per_kwh},
                 {"renewable_share", r.renewable_share}, {"value_micro", trade_value(r)}}
                .dump()
         << '\n';
    }
    for (; bi < b.size() && b[bi].step_index == step; ++bi) {
      const auto& r = b[bi];
      os << json{{"type", "h2_batch"},
                 {"step", r.step_index},
                 {"energy_in_wh", r.energy_in_wh},
                 {"renewable_fraction", r.renewable_fraction},
                 {"mass_kg", r.mass_kg}}
                .dump()
         << '\n';
    }
    for (; di < d.size() && d[di].step_index == step; ++di) {
      const auto& r = d[di];
      os << json{{"type", "h2_draw"},
                 {"step", r.step_index},
                 {"energy_out_wh", r.energy_out_wh},
                 {"mass_kg", r.mass_kg},
                 {"renewable_kg", r.renewable_kg}}
                .dump()
         << '\n';
    }
  }
}

json summary_json(const SimulationResult& result) {
  json balances = json::object();
  for (const auto& [port, b] : result.ledger.balances()) {
    balances[std::to_string(port)] = {
        {"exported_wh", b.exported_wh}, {"imported_wh", b.imported_wh}, {"currency_micro", b.currency}};
  }
  const auto statements = settle(result.ledger, {0, result.requested_steps});
  json settlement = json::object();
  MicroCurrency total = 0;
  for (const auto& [port, s] : statements) {
    settlement[std::to_string(port)] = {{"credit_micro", s.credit}, {"debit_micro", s.debit}, {"net_micro", s.net()}};
    total += s.net();
  }
  double max_residual = 0.0;
  double traded_wh = 0.0;
  for (const auto& s : result.steps) max_residual = std::max(max_residual, std::abs(s.balance_residual_w));
  for (const auto& t : result.ledger.trades()) traded_wh += t.energy_wh;
  const auto inv = renewable_inventory(result.ledger);
  json j{{"scenario", result.scenario_name},
         {"layout", result.layout_name},
         {"seed", result.seed},
         {"step_duration_s", result.step_duration_h * 3600.0},
         {"steps_requested", result.requested_steps},
         {"steps_completed", result.steps.size()},
         {"complete", result.complete()},
         {"partial", !result.complete()},
         {"accounts", result.accounts},
         {"balances", balances},
         {"settlement", settlement},
         {"settlement_sum_micro", total},
         {"traded_wh", traded_wh},
         {"max_balance_residual_w", max_residual},
         {"hydrogen",
          {{"p2g_efficiency", result.hydrogen_params.p2g_efficiency},
           {"fc_efficiency", result.hydrogen_params.fc_efficiency},
           {"lhv_wh_per_kg", result.hydrogen_params.lhv_wh_per_kg},
           {"initial_total_kg", result.initial_hydrogen.total_kg},
           {"initial_renewable_kg", result.initial_hydrogen.renewable_kg},
           {"total_kg", inv.total_kg},
           {"renewable_kg", inv.renewable_kg}}}};
  j["error"] = result.runtime_error ? json(*result.runtime_error) : json(nullptr);
  return j;
}

void write_outputs(const std::filesystem::path& dir, const SimulationResult& result, const MatrixLayout& layout) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("flows.csv");
    write_flows_csv(f, result);
  }
  {
    auto f = open("plans.ndjson");
    write_plans_ndjson(f, result, layout);
  }
  {
    auto f = open("ledger.ndjson");
    write_ledger_ndjson(f, result.ledger);
  }
  {
    auto f = open("summary.json");
    f << summary_json(result).dump(2) << '\n';
  }
}

RecordedRun read_recorded_run(const std::filesystem::path& dir) {
  RecordedRun run;
  json summary;
  {
    std::ifstream in(dir / "summary.json");
    if (!in) throw std::runtime_error("cannot open " + (dir / "summary.json").string());
    summary = json::parse(in);
  }
  run.step_duration_h = summary.at("step_duration_s").get<double>() / 3600.0;
  const auto& h = summary.at("hydrogen");
  run.hydrogen_params = {h.at("p2g_efficiency").get<double>(), h.at("fc_efficiency").get<double>(),
                         h.at("lhv_wh_per_kg").get<double>()};
  run.initial_hydrogen = {h.at("initial_total_kg").get<double>(), h.at("initial_renewable_kg").get<double>()};
  run.accounts = summary.at("accounts").get<std::vector<int>>();
  std::map<int, AccountBalance> balances;
  for (const auto& [k, v] : summary.at("balances").items()) {
    balances[std::stoi(k)] = {v.at("exported_wh").get<double>(), v.at("imported_wh").get<double>(),
                              v.at("currency_micro").get<MicroCurrency>()};
  }
  run.balances = std::move(balances);

  std::map<int, std::vector<PortFlow>> flows;
  {
    std::ifstream in(dir / "flows.csv");
    if (!in) throw std::runtime_error("cannot open " + (dir / "flows.csv").string());
    std::string line;
    if (!std::getline(in, line) || line != "step,port,power_w,served") {
      throw std::runtime_error("flows.csv: unexpected header");
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (cells.size() != 4) throw std::runtime_error("flows.csv: expected 4 columns in '" + line + "'");
      const int step = std::stoi(cells[0]);
      flows[step].push_back({std::stoi(cells[1]), parse_number(cells[2]), cells[3] == "1"});
    }
  }

  for (const auto& j : read_ndjson(dir / "plans.ndjson")) {
    RecordedStep s;
    s.plan = plan_from_json(j);
    s.price_per_kwh = j.at("price_per_kwh").get<double>();
    s.flows = flows[s.plan.step_index];
    run.steps.push_back(std::move(s));
  }

  for (const auto& j : read_ndjson(dir / "ledger.ndjson")) {
    const auto type = j.at("type").get<std::string>();
    if (type == "trade") {
      run.trades.push_back({j.at("step").get<int>(), j.at("from").get<int>(), j.at("to").get<int>(),
                            j.at("energy_wh").get<double>(), j.at("price_per_kwh").get<double>(),
                            j.at("renewable_share").get<double>()});
    } else if (type == "h2_batch") {
      run.batches.push_back({j.at("step").get<int>(), j.at("energy_in_wh").get<double>(),
                             j.at("renewable_fraction").get<double>(), j.at("mass_kg").get<double>()});
    } else if (type == "h2_draw") {
      run.draws.push_back({j.at("step").get<int>(), j.at("energy_out_wh").get<double>(),
                           j.at("mass_kg").get<double>(), j.at("renewable_kg").get<double>()});
    } else {
      throw std::runtime_error("ledger.ndjson: unknown record type '" + type + "'");
    }
  }
  return run;
}

}  // namespace gridroute
