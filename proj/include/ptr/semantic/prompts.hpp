#pragma once

#include <string>

#include "ptr/core/state.hpp"
#include "ptr/core/types.hpp"
#include "ptr/verifier/verifier.hpp"

namespace ptr::semantic {

/// JSON schema for the profile object, embedded verbatim in planning prompts
/// and mirrored by docs/profile.schema.json.
const std::string& profile_json_schema();

std::string build_profile_prompt(const Task& task, const Metadata& metadata);

/// The profile prompt followed by the rejected response and its diagnostic.
std::string build_profile_retry_prompt(const Task& task, const Metadata& metadata, const std::string& previous,
                                       const std::string& diagnostic);

std::string build_repair_prompt(const Task& task, const Metadata& metadata, const Profile& profile,
                                const ExecutionState& state, const verifier::VerificationObject& z);

std::string build_reason_prompt(const Task& task, const Metadata& metadata, const ExecutionState& state,
                                const verifier::VerificationObject& z);

/// First JSON object in `text` (prose and code fences tolerated), read as a
/// Profile. Throws Error("parse_error") with a diagnostic.
Profile parse_profile_response(const std::string& text);

/// Text after the last "Answer:" marker, trimmed; the whole trimmed text if
/// there is none.
std::string extract_final_answer(const std::string& text);

} // namespace ptr::semantic
