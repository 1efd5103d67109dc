#include "gridroute/grid_model.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace gridroute {

namespace {

constexpr std::array<std::pair<DeviceKind, const char*>, 9> kKindNames{{
    {DeviceKind::PhotovoltaicSource, "PhotovoltaicSource"},
    {DeviceKind::StationaryBattery, "StationaryBattery"},
    {DeviceKind::VehicleBattery, "VehicleBattery"},
    {DeviceKind::HouseLoad, "HouseLoad"},
    {DeviceKind::GridTie, "GridTie"},
    {DeviceKind::Electrolyzer, "Electrolyzer"},
    {DeviceKind::FuelCell, "FuelCell"},
    {DeviceKind::CommunityBattery, "CommunityBattery"},
    {DeviceKind::CommunityLoad, "CommunityLoad"},
}};

bool is_community_kind(DeviceKind kind) {
  return kind == DeviceKind::Electrolyzer || kind == DeviceKind::FuelCell ||
         kind == DeviceKind::CommunityBattery || kind == DeviceKind::CommunityLoad;
}

void check_efficiency(std::vector<TopologyViolation>& out, const char* what, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    out.push_back({"asset_efficiency", std::string(what) + " efficiency must lie in (0, 1]"});
  }
}

void check_nonnegative(std::vector<TopologyViolation>& out, const char* what, double value) {
  if (!(value >= 0.0)) {
    out.push_back({"asset_negative", std::string(what) + " must be nonnegative"});
  }
}

}  // namespace

std::string to_string(DeviceKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

DeviceKind device_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw std::invalid_argument("unknown device kind '" + name + "'");
}

bool is_storage(DeviceKind kind) {
  return kind == DeviceKind::StationaryBattery || kind == DeviceKind::VehicleBattery ||
         kind == DeviceKind::CommunityBattery;
}

bool is_source(DeviceKind kind) {
  return kind == DeviceKind::PhotovoltaicSource || kind == DeviceKind::StationaryBattery || kind == DeviceKind::VehicleBattery ||
         kind == DeviceKind::FuelCell;
}

Device make_device(DeviceKind kind, double max_power_w, double capacity_wh) {
  Device d;
  d.kind = kind;
  d.max_power_w = max_power_w;
  d.capacity_wh = capacity_wh;
  d.renewable = kind == DeviceKind::PhotovoltaicSource;
  return d;
}

double renewable_share_of(const HouseProfile& house) {
  double renewable = 0.0;
  double total = 0.0;
  for (const auto& d : house.devices) {
    if (!is_source(d.kind) || d.max_power_w <= 0.0) continue;
    total += d.max_power_w;
    if (d.renewable) renewable += d.max_power_w;
  }
  if (total <= 0.0) return 0.0;
  return renewable / total;
}

NetInjection net_injection(const HouseProfile& house, double step_demand_w, GenerationMix generation) {
  NetInjection inj;
  inj.port_id = house.port_id;
  inj.power_w = generation.total() - step_demand_w;
  if (inj.power_w > 0.0 && generation.total() > 0.0) {
    inj.renewable_share = std::clamp(generation.renewable_w / generation.total(), 0.0, 1.0);
  }
  return inj;
}

NetInjection net_injection(const HouseProfile& house, double step_demand_w, double step_generation_w) {
  const double share = renewable_share_of(house);
  GenerationMix mix;
  if (share >= 1.0) {
    mix.renewable_w = step_generation_w;
  } else if (share <= 0.0) {
    mix.non_renewable_w = step_generation_w;
  } else {
    mix.renewable_w = step_generation_w * share;
    mix.non_renewable_w = step_generation_w - mix.renewable_w;
  }
  NetInjection inj = net_injection(house, step_demand_w, mix);
  // Keep power exact regardless of the mix split.
  inj.power_w = step_generation_w - step_demand_w;
  if (inj.power_w > 0.0 && step_generation_w > 0.0) inj.renewable_share = share;
  return inj;
}

std::string house_entity(int house_id) { return "house:" + std::to_string(house_id); }

PortMap build_port_map(const std::vector<HouseProfile>& houses, const CommunityAssets& assets) {
  PortMap map;
  map.reserve(houses.size() + 1);
  for (const auto& h : houses) map.push_back({house_entity(h.house_id), h.port_id});
  if (assets.port_id != 0) map.push_back({kCommunityEntity, assets.port_id});
  return map;
}

std::vector<TopologyViolation> validate_topology(const std::vector<HouseProfile>& houses,
                                                 const CommunityAssets& assets, const PortMap& port_map) {
  std::vector<TopologyViolation> out;

  std::map<int, std::vector<std::string>> by_port;
  std::map<std::string, int> entity_port;
  for (const auto& a : port_map) {
    if (a.port_id < 1) {
      out.push_back({"port_invalid", a.entity + " mapped to invalid port " + std::to_string(a.port_id)});
    }
    by_port[a.port_id].push_back(a.entity);
    if (!entity_port.emplace(a.entity, a.port_id).second) {
      out.push_back({"entity_duplicate", a.entity + " appears more than once in the port map"});
    }
  }
  for (auto& [port, entities] : by_port) {
    if (entities.size() < 2) continue;
    std::sort(entities.begin(), entities.end());
    std::string msg = "port " + std::to_string(port) + " shared by";
    for (const auto& e : entities) msg += " " + e;
    out.push_back({"port_duplicate", msg});
  }

  std::map<int, int> house_ids;
  for (const auto& h : houses) {
    const std::string entity = house_entity(h.house_id);
    if (++house_ids[h.house_id] == 2) {
      out.push_back({"house_duplicate", "house id " + std::to_string(h.house_id) + " declared more than once"});
    }
    auto it = entity_port.find(entity);
    if (it == entity_port.end()) {
      out.push_back({"house_unmapped", entity + " has no port assignment"});
    } else if (it->second != h.port_id) {
      out.push_back({"house_port_mismatch", entity + " declares port " + std::to_string(h.port_id) +
                                                " but is mapped to port " + std::to_string(it->second)});
    }

    int grid_ties = 0;
    for (const auto& d : h.devices) {
      const std::string where = entity + " " + to_string(d.kind);
      if (d.kind == DeviceKind::GridTie) ++grid_ties;
      if (is_community_kind(d.kind)) {
        out.push_back({"device_owner", where + " is a community device"});
      }
      if (!(d.max_power_w >= 0.0)) out.push_back({"device_power", where + " has a negative power limit"});
      if (!(d.capacity_wh >= 0.0)) out.push_back({"device_capacity", where + " has a negative capacity"});
      if (!(d.soc_min >= 0.0 && d.soc_max <= 1.0)) {
        out.push_back({"device_soc_range", where + " state-of-charge bounds outside [0, 1]"});
      }
      if (!(d.soc_min <= d.soc_max)) {
        out.push_back({"device_soc_order", where + " state-of-charge bound max < min"});
      }
    }
    if (grid_ties > 1) out.push_back({"grid_tie_count", entity + " has more than one grid tie"});
  }

  const auto& b = assets.battery;
  check_nonnegative(out, "battery capacity", b.capacity_wh);
  check_nonnegative(out, "battery max charge", b.max_charge_w);
  check_nonnegative(out, "battery max discharge", b.max_discharge_w);
  check_nonnegative(out, "electrolyzer max input", assets.electrolyzer.max_input_w);
  check_nonnegative(out, "fuel cell max output", assets.fuel_cell.max_output_w);
  check_nonnegative(out, "hydrogen inventory", assets.hydrogen.total_kg);
  check_efficiency(out, "electrolyzer", assets.electrolyzer.efficiency);
  check_efficiency(out, "fuel cell", assets.fuel_cell.efficiency);
  check_efficiency(out, "battery charge", b.charge_efficiency);
  if (!(assets.electrolyzer.lhv_wh_per_kg > 0.0)) {
    out.push_back({"asset_lhv", "hydrogen lower heating value must be positive"});
  }
  if (!(b.soc_min <= b.soc_max)) {
    out.push_back({"battery_soc_order", "community battery state-of-charge bound max < min"});
  } else if (!(b.soc_min >= 0.0 && b.soc_max <= 1.0)) {
    out.push_back({"battery_soc_range", "community battery state-of-charge bounds outside [0, 1]"});
  } else if (!(b.soc >= b.soc_min && b.soc <= b.soc_max)) {
    out.push_back({"battery_soc_initial", "community battery initial state of charge outside its bounds"});
  }
  if (!(b.renewable_fraction >= 0.0 && b.renewable_fraction <= 1.0)) {
    out.push_back({"battery_renewable", "community battery renewable fraction outside [0, 1]"});
  }
  if (!(assets.hydrogen.renewable_kg >= 0.0 && assets.hydrogen.renewable_kg <= assets.hydrogen.total_kg)) {
    out.push_back({"hydrogen_renewable", "renewable hydrogen exceeds total inventory"});
  }
  if (assets.port_id != 0 && entity_port.find(kCommunityEntity) == entity_port.end()) {
    out.push_back({"community_unmapped", "community hub port is not in the port map"});
  }

  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.code, x.message) < std::tie(y.code, y.message);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace gridroute
