#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "biota/campaign.hpp"

namespace biota {

std::string verdict_name(Verdict v);

/// One JSON object per attacked slot, with its evidence.
std::string vector_json(const BuildingConfig& config, const AttackVector& vector, const std::string& digest);
std::string campaign_json(const BuildingConfig& config, const CampaignReport& report);

/// CSV writers start with a "# digest=<hex>" comment line.
void write_campaign_csv(std::ostream& out, const BuildingConfig& config, const CampaignReport& report);
void write_sweep_csv(std::ostream& out, const SweepResult& result, const std::string& currency);
void write_discomfort_csv(std::ostream& out, const std::vector<DiscomfortRow>& rows, const std::string& digest);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, const std::string& digest);

}  // namespace biota
