#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fourmoment/certificate.hpp"
#include "fourmoment/model.hpp"
#include "fourmoment/montecarlo.hpp"
#include "fourmoment/observable.hpp"
#include "fourmoment/oracle.hpp"
#include "fourmoment/spectral.hpp"
#include "fourmoment/verify.hpp"

namespace fourmoment {

/// Default nlohmann object (std::map-backed): keys are emitted sorted, which
/// is what makes dumps canonical.
using Json = nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Sorted keys, 2-space indent, shortest-round-trip doubles, trailing newline.
/// Byte-stable across runs for identical values.
std::string canonical_dump(const Json& j);

Json json_of(const FiniteMarkovModel& model);
FiniteMarkovModel model_from_json(const Json& j);

Json json_of(const Observable& phi);
Json json_of(const NormProfile& profile);
Json json_of(const ErgodicityCertificate& cert);
Json json_of(const SpectralGapEstimate& est);
Json json_of(const GreenKubo& gk);
Json json_of(const McEstimate& est);
Json json_of(const MomentReport& report);
Json json_of(const LedgerEntry& entry);
Json json_of(const LedgerReport& report);
Json json_of(const CltDiagnostics& diag);
Json json_of(const TightnessRow& row);
Json json_of(const TightnessReport& report);

/// Plot-ready CSV tables.
std::string bound_sweep_csv(const std::vector<MomentReport>& reports);
std::string ledger_csv(const LedgerReport& report);
std::string tightness_csv(const TightnessReport& report);

/// Canonical report envelope shared by every CLI subcommand. config_hash is
/// FNV-1a-64 over the canonical dump of `config`; pass reflects the conjunction
/// of `checks`. Timestamps never enter the envelope (sidecar only), so equal
/// config + seed gives byte-identical files.
struct ReportEnvelope {
  Json config;
  std::uint64_t seed = 0;
  Json results;
  Json checks;  // name -> bool
  bool pass = true;
};

Json envelope_json(const ReportEnvelope& envelope);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
Json load_json_file(const std::string& path);

}  // namespace fourmoment
