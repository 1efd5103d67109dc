#include "gridroute/ledger.hpp"

#include <algorithm>
#include <cmath>

namespace gridroute {

MicroCurrency to_micro(double currency) { return static_cast<MicroCurrency>(std::llround(currency * 1e6)); }

double from_micro(MicroCurrency micro) { return static_cast<double>(micro) / 1e6; }

MicroCurrency trade_value(const TradeRecord& t) { return to_micro(t.energy_wh / 1000.0 * t.price_per_kwh); }

double hydrogen_mass_kg(double energy_in_wh, const HydrogenParams& params) {
  return energy_in_wh * params.p2g_efficiency / params.lhv_wh_per_kg;
}

LedgerState::LedgerState(std::vector<int> account_ports, HydrogenParams params) : params_(params) {
  for (int p : account_ports) balances_[p];
}

AccountBalance& LedgerState::account(int port) { return balances_[port]; }

void LedgerState::append(const TradeRecord& trade) {
  if (!(trade.energy_wh > 0.0)) throw std::invalid_argument("trade energy must be positive");
  if (!(trade.renewable_share >= 0.0 && trade.renewable_share <= 1.0)) {
    throw std::invalid_argument("trade renewable share outside [0, 1]");
  }
  trades_.push_back(trade);
  const MicroCurrency value = trade_value(trade);
  auto& seller = account(trade.from_port);
  seller.exported_wh += trade.energy_wh;
  seller.currency += value;
  auto& buyer = account(trade.to_port);
  buyer.imported_wh += trade.energy_wh;
  buyer.currency -= value;
}

void LedgerState::append(const HydrogenBatch& batch) {
  if (!(batch.mass_kg >= 0.0)) throw std::invalid_argument("hydrogen batch mass must be nonnegative");
  if (!(batch.renewable_fraction >= 0.0 && batch.renewable_fraction <= 1.0)) {
    throw std::invalid_argument("hydrogen batch renewable fraction outside [0, 1]");
  }
  batches_.push_back(batch);
  h2_total_kg_ += batch.mass_kg;
  h2_renewable_kg_ += batch.mass_kg * batch.renewable_fraction;
}

HydrogenDraw LedgerState::draw(int step_index, double energy_out_wh) {
  HydrogenDraw d;
  d.step_index = step_index;
  d.energy_out_wh = energy_out_wh;
  d.mass_kg = std::min(h2_total_kg_, energy_out_wh / (params_.fc_efficiency * params_.lhv_wh_per_kg));
  const double fraction = h2_total_kg_ > 0.0 ? h2_renewable_kg_ / h2_total_kg_ : 0.0;
  d.renewable_kg = std::min(h2_renewable_kg_, d.mass_kg * fraction);
  draws_.push_back(d);
  h2_total_kg_ -= d.mass_kg;
  h2_renewable_kg_ -= d.renewable_kg;
  return d;
}

void LedgerState::seed_hydrogen(double total_kg, double renewable_kg) {
  h2_total_kg_ = total_kg;
  h2_renewable_kg_ = renewable_kg;
}

LedgerState LedgerState::replay(std::vector<int> account_ports, HydrogenParams params, double initial_total_kg,
                                double initial_renewable_kg, const std::vector<TradeRecord>& trades,
                                const std::vector<HydrogenBatch>& batches, const std::vector<HydrogenDraw>& draws) {
  LedgerState s(std::move(account_ports), params);
  s.seed_hydrogen(initial_total_kg, initial_renewable_kg);
  for (const auto& t : trades) s.append(t);
  // Batches and draws interleave by step; a step's batch lands before its draw.
  std::size_t b = 0, d = 0;
  while (b < batches.size() || d < draws.size()) {
    if (d >= draws.size() || (b < batches.size() && batches[b].step_index <= draws[d].step_index)) {
      s.append(batches[b++]);
    } else {
      s.draw(draws[d].step_index, draws[d].energy_out_wh);
      ++d;
    }
  }
  return s;
}

void check_flows_match(const DispatchPlan& plan, const StepFlows& flows) {
  const auto expected = plan.port_injections();
  for (const auto& f : flows.flows) {
    auto it = expected.find(f.port_id);
    const double want = it == expected.end() ? 0.0 : it->second;
    const double got = f.served ? f.power_w : 0.0;
    if (std::abs(want - got) > kFlowMatchTolerance) {
      throw FlowMismatch("port " + std::to_string(f.port_id) + ": plan routes " + format_watts(want) +
                         " W but solved flow is " + format_watts(got) + " W");
    }
  }
  for (const auto& [port, w] : expected) {
    if (flows.flow(port) == nullptr && std::abs(w) > kFlowMatchTolerance) {
      throw FlowMismatch("port " + std::to_string(port) + " routed but absent from solved flows");
    }
  }
}

void record_step(LedgerState& state, const DispatchPlan& plan, const StepFlows& flows, double step_duration_h,
                 double price_per_kwh) {
  check_flows_match(plan, flows);
  append_step(state, plan, step_duration_h, price_per_kwh);
}

void append_step(LedgerState& state, const DispatchPlan& plan, double step_duration_h, double price_per_kwh) {
  for (const auto& p : plan.pairings) {
    TradeRecord t;
    t.step_index = plan.step_index;
    t.from_port = p.source_port;
    t.to_port = p.sink_port;
    t.energy_wh = p.power_w * step_duration_h;
    t.price_per_kwh = price_per_kwh;
    t.renewable_share = p.renewable_share;
    state.append(t);
  }
  if (plan.p2g_input_w > 0.0) {
    double weighted = 0.0;
    double total = 0.0;
    for (const auto& in : plan.storage_inputs) {
      weighted += in.p2g_w * in.renewable_share;
      total += in.p2g_w;
    }
    HydrogenBatch batch;
    batch.step_index = plan.step_index;
    batch.energy_in_wh = plan.p2g_input_w * step_duration_h;
    batch.renewable_fraction = total > 0.0 ? std::clamp(weighted / total, 0.0, 1.0) : 0.0;
    batch.mass_kg = hydrogen_mass_kg(batch.energy_in_wh, state.params());
    state.append(batch);
  }
  if (plan.fc_output_w > 0.0) state.draw(plan.step_index, plan.fc_output_w * step_duration_h);
}

InventoryReport renewable_inventory(const LedgerState& state) {
  return {state.hydrogen_total_kg(), state.hydrogen_renewable_kg()};
}

std::map<int, Statement> settle(const LedgerState& state, const Period& period) {
  std::map<int, Statement> out;
  for (const auto& [port, bal] : state.balances()) out[port];
  for (const auto& t : state.trades()) {
    if (!period.contains(t.step_index)) continue;
    const MicroCurrency value = trade_value(t);
    auto& seller = out[t.from_port];
    seller.credit += value;
    seller.sold_wh += t.energy_wh;
    auto& buyer = out[t.to_port];
    buyer.debit += value;
    buyer.bought_wh += t.energy_wh;
  }
  return out;
}

}  // namespace gridroute
