#pragma once

#include <string>

#include "btground/proposers.hpp"

namespace btground {

/// Adapter spec string from the CLI: `external:cmd=<shell command>` or
/// `external:url=<http endpoint>`. Throws DomainError on anything else.
struct ExternalSpec {
  enum class Kind { Command, Url };
  Kind kind = Kind::Command;
  std::string value;
};

ExternalSpec parse_external_spec(const std::string& spec);

/// Proposer bundle speaking the line-delimited record protocol: one
/// request per line on the adapter's stdin, one response per line on its
/// stdout (or a POST of the identical record for url specs). Protocol
/// failures throw ProtocolError; the grounding engine degrades them to
/// "no proposal" / built-in fallbacks.
ProposerBundle make_external_proposer(const std::string& spec, int timeout_ms = 120000);

}  // namespace btground
