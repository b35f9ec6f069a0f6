#pragma once

#include <string>
#include <vector>

#include "ptr/core/types.hpp"

namespace ptr {

struct ValidationIssue {
    std::string kind; // duplicate_tool_id, empty_tool_id, bad_rule_syntax, ...
    std::string detail;

    bool operator==(const ValidationIssue&) const = default;
};

/// Structural checks on metadata: unique non-empty tool ids, unique auto-rule
/// ids, and every rule source in the constraint set parses.
std::vector<ValidationIssue> validate_metadata(const Metadata& metadata);

struct AdmissibilityViolation {
    int step = 0; // 1-based step index, 0 for profile-level violations
    std::string kind;
    std::string detail;

    bool operator==(const AdmissibilityViolation&) const = default;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityViolation> violations;

    bool admissible() const { return violations.empty(); }
    bool has(const std::string& kind) const;
    bool operator==(const AdmissibilityReport&) const = default;
};

/// Checks that every tool is in the catalog, every parameter is
/// schema-compatible or marked for resolution, every branch rule parses and
/// only assigns slots of its target tool, and every replan condition parses as
/// a state predicate. Violations are listed in step order.
AdmissibilityReport check_admissibility(const Profile& profile, const Metadata& metadata);

} // namespace ptr
