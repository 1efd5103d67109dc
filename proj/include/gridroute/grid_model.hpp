#pragma once

#include <string>
#include <vector>

namespace gridroute {

enum class DeviceKind {
  PhotovoltaicSource,
  StationaryBattery,
  VehicleBattery,
  HouseLoad,
  GridTie,
  Electrolyzer,
  FuelCell,
  CommunityBattery,
  CommunityLoad,
};

std::string to_string(DeviceKind kind);
/// Throws std::invalid_argument on an unknown name.
DeviceKind device_kind_from_string(const std::string& name);

bool is_storage(DeviceKind kind);
/// Devices that can contribute to a house's exported generation. The grid tie
/// only backs local demand and never counts as generation.
bool is_source(DeviceKind kind);

struct Device {
  DeviceKind kind = DeviceKind::HouseLoad;
  double max_power_w = 0.0;
  double capacity_wh = 0.0;  // storage only
  double soc_min = 0.0;
  double soc_max = 1.0;
  bool renewable = false;
};

/// Default renewable attribution: PV is renewable, everything else is not.
Device make_device(DeviceKind kind, double max_power_w, double capacity_wh = 0.0);

struct HouseProfile {
  int house_id = 0;
  int port_id = 0;
  std::vector<Device> devices;
};

/// Signed power at a router port; positive means the house exports into the router.
struct NetInjection {
  int port_id = 0;
  double power_w = 0.0;
  double renewable_share = 0.0;
};

struct BatteryAsset {
  double capacity_wh = 0.0;
  double max_charge_w = 0.0;
  double max_discharge_w = 0.0;
  double soc = 0.5;
  double soc_min = 0.0;
  double soc_max = 1.0;
  double charge_efficiency = 1.0;
  /// Share of the stored energy that came from renewable inputs.
  double renewable_fraction = 0.0;
};

struct ElectrolyzerAsset {
  double max_input_w = 0.0;
  double efficiency = 0.7;
  double lhv_wh_per_kg = 33330.0;
};

struct FuelCellAsset {
  double max_output_w = 0.0;
  double efficiency = 0.5;
};

struct HydrogenStore {
  double total_kg = 0.0;
  double renewable_kg = 0.0;
};

struct CommunityAssets {
  int port_id = 0;  // 0 = community hub not attached to the router
  BatteryAsset battery;
  ElectrolyzerAsset electrolyzer;
  FuelCellAsset fuel_cell;
  HydrogenStore hydrogen;
};

/// Explicit split of a step's generation by origin.
struct GenerationMix {
  double renewable_w = 0.0;
  double non_renewable_w = 0.0;
  double total() const { return renewable_w + non_renewable_w; }
};

/// Renewable share of scalar generation, attributed pro-rata to the house's
/// source devices by their power limits. A house without sources yields 0.
double renewable_share_of(const HouseProfile& house);

NetInjection net_injection(const HouseProfile& house, double step_demand_w, GenerationMix generation);
NetInjection net_injection(const HouseProfile& house, double step_demand_w, double step_generation_w);

struct PortAssignment {
  std::string entity;  // "house:<id>" or "community"
  int port_id = 0;
};

using PortMap = std::vector<PortAssignment>;

std::string house_entity(int house_id);
inline constexpr const char* kCommunityEntity = "community";

PortMap build_port_map(const std::vector<HouseProfile>& houses, const CommunityAssets& assets);

struct TopologyViolation {
  std::string code;
  std::string message;
  bool operator==(const TopologyViolation&) const = default;
};

/// Returns violations sorted by (code, message); empty iff the topology is valid.
std::vector<TopologyViolation> validate_topology(const std::vector<HouseProfile>& houses,
                                                 const CommunityAssets& assets, const PortMap& port_map);

}  // namespace gridroute
