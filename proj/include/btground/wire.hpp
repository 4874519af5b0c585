#pragma once

#include <string>

#include "btground/proposers.hpp"

namespace btground {

/// One-line canonical JSON record for a proposer request. Keys are sorted;
/// the i_fail / i_e fields are present only when the corresponding
/// contexts were included, so ablation is checkable on the raw bytes.
std::string serialize_request(const ProposerRequest& request);

/// Phase-matched adapter response.
struct WireResponse {
  std::vector<ActionModel> models;        // initial_proposal / repair_proposal
  std::optional<PolicyChoice> policy;     // policy_sample
  RefineOutcome refinement;               // refine
};

/// Parse one adapter response line against the request's phase. Malformed
/// records, unknown atoms, and schema mismatches throw ProtocolError.
WireResponse parse_response(const std::string& line, ProposerPhase phase,
                            const DomainUniverse& universe);

}  // namespace btground
