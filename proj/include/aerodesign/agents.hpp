#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aerodesign/aero.hpp"
#include "aerodesign/chat.hpp"
#include "aerodesign/embedding.hpp"
#include "aerodesign/geometry.hpp"
#include "aerodesign/retrieval.hpp"
#include "aerodesign/sampling.hpp"

namespace aerodesign {

/// What an agent needs to talk: its chat backend plus optional retrieval over
/// its own knowledge-graph store. A null store means no retrieval.
struct AgentContext {
  const ChatBackend* backend = nullptr;
  const VectorStore* store = nullptr;
  const Embedder* embedder = nullptr;
  const ChatBackend* rewriter = nullptr;  // query rewriting; null skips it
  std::size_t k = kDefaultTopK;
};

struct RequirementsDoc {
  std::vector<std::string> functional;
  std::vector<std::string> non_functional;
  std::vector<std::string> provenance;  // retrieved chunk ids
  std::vector<std::string> warnings;

  friend bool operator==(const RequirementsDoc&, const RequirementsDoc&) = default;
};

enum class Verdict { valid, invalid };
enum class Reviewer { systems_engineer, manager };
std::string to_string(Verdict v);
std::string to_string(Reviewer r);
Verdict verdict_from_string(const std::string& s);
Reviewer reviewer_from_string(const std::string& s);

struct CitedMetrics {
  std::optional<double> cl, cd, cm;
  friend bool operator==(const CitedMetrics&, const CitedMetrics&) = default;
};

struct ReviewVerdict {
  int design_id = 0;
  Verdict verdict = Verdict::invalid;
  std::string feedback;
  Reviewer reviewer = Reviewer::systems_engineer;
  std::optional<CitedMetrics> metrics_cited;
  bool vision_fallback = false;  // image replaced by a textual geometry summary
  std::vector<std::string> provenance;

  friend bool operator==(const ReviewVerdict&, const ReviewVerdict&) = default;
};

struct RevisionProposal {
  DesignParams new_params{0.0, 0.0, 0.0};
  std::string rationale;
  int parent_design_id = 0;
  bool clamped = false;  // nudged back inside the design space (within 1% of an axis)
  std::vector<std::string> provenance;

  friend bool operator==(const RevisionProposal&, const RevisionProposal&) = default;
};

/// The design shown to a reviewer.
struct DesignUnderReview {
  int design_id = 0;
  DesignParams params{0.0, 0.0, 0.0};
  const AirfoilProfile* profile = nullptr;
  AeroResult aero;
};

// Parsers for the structured replies. Each accepts a fenced block
// (```requirements, ```result, ```revision) of `key: value` lines and falls
// back to a lenient reading of free text. They throw Error(backend.unparseable).
RequirementsDoc parse_requirements(const std::string& reply);
ReviewVerdict parse_review(const std::string& reply, int design_id);
struct ParsedRevision {
  double max_camber = 0.0;
  double camber_location = 0.0;
  double max_thickness = 0.0;
  std::string rationale;
};
ParsedRevision parse_revision(const std::string& reply);

// Textual stand-in for the profile image when the backend has no vision.
std::string geometry_summary(const AirfoilProfile& profile);

RequirementsDoc elicit_requirements(const std::string& kickoff_prompt, const AgentContext& ctx);

// The manager note, when given, is placed in the prompt and is guaranteed to
// appear word for word in the returned feedback.
ReviewVerdict review_design(const DesignUnderReview& design, const RequirementsDoc& requirements,
                            const AgentContext& ctx,
                            const std::optional<std::string>& manager_note = std::nullopt);

// Throws Error(agents.out_of_space) for a proposal more than 1% of an axis
// width outside `space`; smaller excursions are clamped.
RevisionProposal propose_revision(const ReviewVerdict& feedback, const DesignParams& current,
                                  int revision_number, const DesignSpace& space,
                                  const AgentContext& ctx);

}  // namespace aerodesign
