#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trustlab/server/service.hpp"
#include "trustlab/synth/bots.hpp"
#include "trustlab/synth/trust_gen.hpp"

namespace trustlab::pipeline {

struct CohortOptions {
  int sessions = 20;  // groups alternate in creation order
  std::uint64_t seed = 1;
  synth::SyntheticTrustParams trust{{0.3, 0.5, 0.7}, {0.6}, {}, 0, 0.05, std::make_pair(0.0, 1.0), 0.5};
  double bot_skill = 0.9;
  std::vector<synth::BotKind> kinds{synth::BotKind::LawnmowerComplement, synth::BotKind::RandomWalk,
                                    synth::BotKind::Overlapper};
};

/// Plays complete bot sessions through the service. Each bot's ratings come
/// from its own synthetic trust trajectory; sessions are flagged synthetic.
/// Returns the new session ids in creation order.
std::vector<std::string> simulate_cohort(server::ExperimentService& service,
                                         const CohortOptions& options);

/// Reads an export stream from disk.
std::vector<server::SessionData> read_export(const std::filesystem::path& path);

}  // namespace trustlab::pipeline
