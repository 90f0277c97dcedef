#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pic/gateway.hpp"

namespace pic {

// Claim texts recovered from a rendered PIC prompt (full, partial, or final
// pipeline template). Used by model-shaped mocks to behave like a model that
// read the prompt.
std::vector<std::string> parse_prompt_claims(const std::string& prompt);

// Deterministic offline behaviors for kind=mock profiles:
//   echo                  returns the prompt itself
//   static_text           returns config.text
//   fixture               config.responses{prompt: text} + config.default
//   identity_model        answers a PIC prompt with the claims joined by " "
//   drop_last_model       same but omits the final claim
//   rule_extractor        returns the focus sentence of an extraction prompt
//   containment_verifier  supported iff candidate/context contain each other
//                         (config.unsupported_marker forces unsupported)
//   birthplace_demo       canned draft/answers/final for the birthplace task
//   birthplace_judge      matches entity and birthplace between claim/answer
// Keys every behavior accepts: logprob_mode ("constant"|"hashed"),
// logprob_value, logprob_offset, latency_ms.
std::shared_ptr<MockBackend> make_mock_backend(
    const std::string& behavior, const nlohmann::json& config = nlohmann::json::object());

const std::vector<std::string>& mock_behavior_names();

} // namespace pic
