#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridroute/power_flow.hpp"
#include "gridroute/scheduler.hpp"

namespace gridroute {

/// Tolerance between a pairing's power and the solved port flow.
inline constexpr double kFlowMatchTolerance = 1e-6;

/// Currency is kept in integer millionths so settlement is exactly zero-sum.
using MicroCurrency = std::int64_t;

MicroCurrency to_micro(double currency);
double from_micro(MicroCurrency micro);

struct TradeRecord {
  int step_index = 0;
  int from_port = 0;
  int to_port = 0;
  double energy_wh = 0.0;
  double price_per_kwh = 0.0;
  double renewable_share = 0.0;
  bool operator==(const TradeRecord&) const = default;
};

/// Value of a trade in micro-currency, rounded half away from zero.
MicroCurrency trade_value(const TradeRecord& t);

struct HydrogenBatch {
  int step_index = 0;
  double energy_in_wh = 0.0;
  double renewable_fraction = 0.0;
  double mass_kg = 0.0;
  bool operator==(const HydrogenBatch&) const = default;
};

/// Hydrogen drawn by the fuel cell, split pro-rata over the pooled inventory.
struct HydrogenDraw {
  int step_index = 0;
  double energy_out_wh = 0.0;
  double mass_kg = 0.0;
  double renewable_kg = 0.0;
  bool operator==(const HydrogenDraw&) const = default;
};

struct AccountBalance {
  double exported_wh = 0.0;
  double imported_wh = 0.0;
  MicroCurrency currency = 0;
  bool operator==(const AccountBalance&) const = default;
};

struct HydrogenParams {
  double p2g_efficiency = 0.7;
  double fc_efficiency = 0.5;
  double lhv_wh_per_kg = 33330.0;
  bool operator==(const HydrogenParams&) const = default;
};

/// mass = energy x efficiency / LHV
double hydrogen_mass_kg(double energy_in_wh, const HydrogenParams& params);

class FlowMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only record of trades and hydrogen movements with running balances.
class LedgerState {
 public:
  LedgerState() = default;
  LedgerState(std::vector<int> account_ports, HydrogenParams params);

  const std::vector<TradeRecord>& trades() const { return trades_; }
  const std::vector<HydrogenBatch>& batches() const { return batches_; }
  const std::vector<HydrogenDraw>& draws() const { return draws_; }
  const std::map<int, AccountBalance>& balances() const { return balances_; }
  const HydrogenParams& params() const { return params_; }
  double hydrogen_total_kg() const { return h2_total_kg_; }
  double hydrogen_renewable_kg() const { return h2_renewable_kg_; }

  void append(const TradeRecord& trade);
  void append(const HydrogenBatch& batch);
  /// Draws mass_kg pro-rata from the pool; fills in renewable_kg.
  HydrogenDraw draw(int step_index, double energy_out_wh);

  /// Seed the pool without a batch record (initial inventory).
  void seed_hydrogen(double total_kg, double renewable_kg);

  /// Rebuild a ledger from its records; equal to *this when the records are untampered.
  static LedgerState replay(std::vector<int> account_ports, HydrogenParams params, double initial_total_kg,
                            double initial_renewable_kg, const std::vector<TradeRecord>& trades,
                            const std::vector<HydrogenBatch>& batches, const std::vector<HydrogenDraw>& draws);

  bool operator==(const LedgerState&) const = default;

 private:
  AccountBalance& account(int port);

  HydrogenParams params_;
  std::vector<TradeRecord> trades_;
  std::vector<HydrogenBatch> batches_;
  std::vector<HydrogenDraw> draws_;
  std::map<int, AccountBalance> balances_;
  double h2_total_kg_ = 0.0;
  double h2_renewable_kg_ = 0.0;
};

/// Check that every port's solved flow equals the plan's pairing sum.
/// Throws FlowMismatch on divergence beyond kFlowMatchTolerance.
void check_flows_match(const DispatchPlan& plan, const StepFlows& flows);

/// Appends the records a plan implies, without consulting flows.
void append_step(LedgerState& state, const DispatchPlan& plan, double step_duration_h, double price_per_kwh);

/// check_flows_match, then append_step. Records one trade per pairing and a hydrogen batch when P2G ran; the batch
/// renewable fraction is the energy-weighted share of the plan's storage inputs.
void record_step(LedgerState& state, const DispatchPlan& plan, const StepFlows& flows, double step_duration_h,
                 double price_per_kwh);

struct InventoryReport {
  double total_kg = 0.0;
  double renewable_kg = 0.0;
};

/// Produced hydrogen (sum of batches) net of fuel-cell draws.
InventoryReport renewable_inventory(const LedgerState& state);

struct Period {
  int first_step = 0;
  int end_step = 0;  // exclusive
  bool contains(int step) const { return step >= first_step && step < end_step; }
};

struct Statement {
  MicroCurrency credit = 0;
  MicroCurrency debit = 0;
  double sold_wh = 0.0;
  double bought_wh = 0.0;
  MicroCurrency net() const { return credit - debit; }
  bool operator==(const Statement&) const = default;
};

/// Per-account statements for trades within period; the nets sum to exactly zero.
std::map<int, Statement> settle(const LedgerState& state, const Period& period);

}  // namespace gridroute
