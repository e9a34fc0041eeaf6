#include "aerodesign/agents.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>

#include "aerodesign/error.hpp"
#include "aerodesign/render.hpp"
#include "aerodesign/resources.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace {

constexpr int kMaxAttempts = 3;  // first try plus two retries

const char* kRequirementsFormat =
    "Reply with a fenced block:\n"
    "```requirements\n"
    "functional:\n"
    "- <requirement>\n"
    "non_functional:\n"
    "- <requirement>\n"
    "```";

const char* kReviewFormat =
    "Reply with a fenced block:\n"
    "```result\n"
    "verdict: valid | invalid\n"
    "feedback: <what must change, required when invalid>\n"
    "```";

const char* kRevisionFormat =
    "Reply with a fenced block:\n"
    "```revision\n"
    "max_camber: <fraction of chord>\n"
    "camber_location: <fraction of chord>\n"
    "max_thickness: <fraction of chord>\n"
    "rationale: <why these values>\n"
    "```";

std::optional<std::string> fenced_block(const std::string& text, const std::string& tag) {
  const std::string open = "```" + tag;
  const auto start = text.find(open);
  if (start == std::string::npos) return std::nullopt;
  auto body = text.find('\n', start);
  if (body == std::string::npos) return std::nullopt;
  ++body;
  const auto close = text.find("```", body);
  return text.substr(body, close == std::string::npos ? std::string::npos : close - body);
}

bool is_key_char(char c) {
  return std::islower(static_cast<unsigned char>(c)) || c == '_';
}

// `key: value` lines; lines that do not start a key continue the previous value.
std::map<std::string, std::string> key_values(const std::string& block) {
  std::map<std::string, std::string> kv;
  std::string current;
  std::size_t pos = 0;
  while (pos <= block.size()) {
    auto nl = block.find('\n', pos);
    if (nl == std::string::npos) nl = block.size();
    const std::string line = block.substr(pos, nl - pos);
    pos = nl + 1;
    const std::string t = trim(line);
    std::size_t k = 0;
    while (k < t.size() && is_key_char(t[k])) ++k;
    if (k > 0 && k < t.size() && t[k] == ':') {
      current = t.substr(0, k);
      kv[current] = trim(t.substr(k + 1));
    } else if (!current.empty() && !t.empty()) {
      auto& v = kv[current];
      v += v.empty() ? t : "\n" + t;
    }
    if (nl == block.size()) break;
  }
  return kv;
}

std::optional<double> parse_number(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    const std::string rest = trim(t.substr(used));
    if (rest == "%") v /= 100.0;
    else if (!rest.empty()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string strip_item(std::string line) {
  line = trim(line);
  if (!line.empty() && (line[0] == '-' || line[0] == '*')) line = trim(line.substr(1));
  if (line.rfind("•", 0) == 0) line = trim(line.substr(3));
  std::size_t d = 0;
  while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
  if (d > 0 && d < line.size() && (line[d] == '.' || line[d] == ')')) line = trim(line.substr(d + 1));
  while (!line.empty() && (line.front() == '"' || line.front() == '\'')) line.erase(0, 1);
  while (!line.empty() && (line.back() == '"' || line.back() == '\'')) line.pop_back();
  return trim(line);
}

enum class Section { none, functional, non_functional };

Section heading(const std::string& line) {
  std::string h;
  for (char c : to_lower(line)) {
    if (c == '#' || c == '*' || c == ':' || c == '"') continue;
    h.push_back(c == '_' || c == '-' ? ' ' : c);
  }
  h = normalize_concept(h);
  if (h == "functional" || h == "functional requirements") return Section::functional;
  if (h == "non functional" || h == "non functional requirements" || h == "nonfunctional" ||
      h == "nonfunctional requirements") {
    return Section::non_functional;
  }
  return Section::none;
}

std::string fmt_param(double v) { return format_fixed(v, 4); }

std::string params_block(const DesignParams& p) {
  return "max_camber: " + fmt_param(p.max_camber()) +
         "\ncamber_location: " + fmt_param(p.camber_location()) +
         "\nmax_thickness: " + fmt_param(p.max_thickness()) + "\n";
}

Retrieval maybe_retrieve(const std::string& prompt, const AgentContext& ctx) {
  if (!ctx.store || !ctx.embedder) return Retrieval{prompt, {}, {}, {}};
  return retrieve(prompt, *ctx.store, *ctx.embedder, ctx.rewriter, ctx.k);
}

const ChatBackend& backend_of(const AgentContext& ctx) {
  if (!ctx.backend) throw Error(errc::config_invalid, "agent has no chat backend");
  return *ctx.backend;
}

// Runs the conversation, re-asking with the format restated when `parse`
// throws an unparseable error.
template <class Parse>
auto complete_with_retries(const ChatBackend& backend, std::vector<ChatMessage> messages,
                           const char* format, Parse parse) {
  std::string last_error;
  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    const std::string reply = backend.complete(messages);
    try {
      return parse(reply);
    } catch (const Error& e) {
      if (e.code() != errc::unparseable) throw;
      last_error = e.what();
    }
    messages.push_back({Role::assistant, reply, std::nullopt});
    messages.push_back({Role::user,
                        "Your previous reply could not be parsed (" + last_error + "). " + format,
                        std::nullopt});
  }
  throw Error(errc::unparseable, last_error + " (after 2 retries)");
}

std::optional<CitedMetrics> cited_metrics(const std::map<std::string, std::string>& kv,
                                          const std::string& text) {
  CitedMetrics m;
  auto from_kv = [&](const char* key) -> std::optional<double> {
    const auto it = kv.find(key);
    return it == kv.end() ? std::nullopt : parse_number(it->second);
  };
  m.cl = from_kv("cl");
  m.cd = from_kv("cd");
  m.cm = from_kv("cm");
  static const std::regex cite(R"(\b(CL|CD|CM)\)?\s*(?:of|at|=|:)?\s*(-?[0-9]*\.[0-9]+|-?[0-9]+))");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), cite); it != std::sregex_iterator();
       ++it) {
    const std::string which = (*it)[1];
    const double v = std::stod((*it)[2]);
    auto& slot = which == "CL" ? m.cl : which == "CD" ? m.cd : m.cm;
    if (!slot) slot = v;
  }
  if (!m.cl && !m.cd && !m.cm) return std::nullopt;
  return m;
}

}  // namespace

std::string to_string(Verdict v) { return v == Verdict::valid ? "valid" : "invalid"; }
std::string to_string(Reviewer r) {
  return r == Reviewer::manager ? "manager" : "systems_engineer";
}
Verdict verdict_from_string(const std::string& s) {
  if (s == "valid") return Verdict::valid;
  if (s == "invalid") return Verdict::invalid;
  throw Error(errc::schema, "unknown verdict '" + s + "'");
}
Reviewer reviewer_from_string(const std::string& s) {
  if (s == "systems_engineer") return Reviewer::systems_engineer;
  if (s == "manager") return Reviewer::manager;
  throw Error(errc::schema, "unknown reviewer '" + s + "'");
}

RequirementsDoc parse_requirements(const std::string& reply) {
  const std::string body = fenced_block(reply, "requirements").value_or(reply);
  RequirementsDoc doc;
  Section section = Section::none;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string::npos) nl = body.size();
    const std::string line = body.substr(pos, nl - pos);
    pos = nl + 1;
    if (const Section h = heading(line); h != Section::none) {
      section = h;
      continue;
    }
    const std::string item = strip_item(line);
    if (item.empty() || section == Section::none) continue;
    (section == Section::functional ? doc.functional : doc.non_functional).push_back(item);
  }
  if (doc.functional.empty()) throw Error(errc::unparseable, "missing functional section");
  if (doc.non_functional.empty()) throw Error(errc::unparseable, "missing non-functional section");
  return doc;
}

ReviewVerdict parse_review(const std::string& reply, int design_id) {
  ReviewVerdict v;
  v.design_id = design_id;
  std::map<std::string, std::string> kv;
  if (const auto block = fenced_block(reply, "result")) {
    kv = key_values(*block);
    const auto it = kv.find("verdict");
    if (it == kv.end()) throw Error(errc::unparseable, "result block has no verdict");
    const std::string word = to_lower(trim(it->second));
    if (word != "valid" && word != "invalid") {
      throw Error(errc::unparseable, "verdict must be valid or invalid");
    }
    v.verdict = verdict_from_string(word);
    if (const auto f = kv.find("feedback"); f != kv.end()) v.feedback = f->second;
  } else {
    const std::string text = trim(reply);
    static const std::regex prefix(R"(^(valid|invalid)\s*[:\-])", std::regex::icase);
    static const std::regex invalid_word(R"(\binvalid\b)", std::regex::icase);
    static const std::regex valid_word(R"(\bvalid\b)", std::regex::icase);
    std::smatch m;
    const std::string head = text.substr(0, std::min<std::size_t>(text.size(), 16));
    if (std::regex_search(head, m, prefix)) {
      v.verdict = verdict_from_string(to_lower(m[1].str()));
      v.feedback = trim(text.substr(static_cast<std::size_t>(m.length(0))));
    } else if (std::regex_search(text, invalid_word)) {
      v.verdict = Verdict::invalid;
      v.feedback = text;
    } else if (std::regex_search(text, valid_word)) {
      v.verdict = Verdict::valid;
      v.feedback = text;
    } else {
      throw Error(errc::unparseable, "review reply states no verdict");
    }
  }
  if (v.verdict == Verdict::invalid && trim(v.feedback).empty()) {
    throw Error(errc::unparseable, "invalid verdict without feedback");
  }
  v.metrics_cited = cited_metrics(kv, reply);
  return v;
}

ParsedRevision parse_revision(const std::string& reply) {
  ParsedRevision out;
  std::optional<double> m, p, t;
  if (const auto block = fenced_block(reply, "revision")) {
    const auto kv = key_values(*block);
    auto get = [&](const char* key) -> std::optional<double> {
      const auto it = kv.find(key);
      return it == kv.end() ? std::nullopt : parse_number(it->second);
    };
    m = get("max_camber");
    p = get("camber_location");
    t = get("max_thickness");
    if (const auto r = kv.find("rationale"); r != kv.end()) out.rationale = r->second;
  } else {
    const std::string num = R"(\s*[:=]\s*([0-9]*\.?[0-9]+\s*%?))";
    static const std::regex camber("max(?:imum)?[ _]*camber" + num, std::regex::icase);
    static const std::regex location("camber[ _]*location" + num, std::regex::icase);
    static const std::regex thickness("(?:max(?:imum)?[ _]*)?thickness" + num, std::regex::icase);
    std::smatch match;
    if (std::regex_search(reply, match, camber)) m = parse_number(match[1]);
    if (std::regex_search(reply, match, location)) p = parse_number(match[1]);
    if (std::regex_search(reply, match, thickness)) t = parse_number(match[1]);
    out.rationale = trim(reply);
  }
  if (!m || !p || !t) {
    throw Error(errc::unparseable,
                "revision must give max camber, camber location and max thickness");
  }
  out.max_camber = *m;
  out.camber_location = *p;
  out.max_thickness = *t;
  return out;
}

std::string geometry_summary(const AirfoilProfile& profile) {
  const auto peak = max_thickness(profile);
  double camber_peak = 0.0, camber_x = 0.0;
  for (std::size_t i = 0; i < profile.upper().size(); ++i) {
    const double c = 0.5 * (profile.upper()[i].y + profile.lower()[i].y);
    if (std::abs(c) > std::abs(camber_peak)) {
      camber_peak = c;
      camber_x = profile.upper()[i].x;
    }
  }
  const double te = profile.upper().back().y - profile.lower().back().y;
  const double t10 = local_thickness(profile, 0.10);
  const double t90 = local_thickness(profile, 0.90);
  return "Geometry summary (no image available): maximum thickness " +
         format_fixed(peak.thickness, 4) + " at x=" + format_fixed(peak.x, 3) +
         "; maximum mean-line height " + format_fixed(camber_peak, 4) + " at x=" +
         format_fixed(camber_x, 3) + "; thickness at x=0.10 " + format_fixed(t10, 4) +
         ", at x=0.90 " + format_fixed(t90, 4) + "; trailing-edge thickness " +
         format_fixed(te, 5) + "; " + std::to_string(profile.n_per_surface()) +
         " points per surface.";
}

RequirementsDoc elicit_requirements(const std::string& kickoff_prompt, const AgentContext& ctx) {
  const ChatBackend& backend = backend_of(ctx);
  const Retrieval r = maybe_retrieve(kickoff_prompt, ctx);
  const std::string task =
      "Requirement elicitation. Turn the Manager's request below into functional and "
      "non-functional engineering requirements for the airfoil.\n" +
      std::string(kRequirementsFormat) + "\n\nManager request: " + kickoff_prompt;
  std::vector<ChatMessage> messages{
      {Role::system, resource_text("systems_engineer_role"), std::nullopt},
      {Role::user, augment_prompt(task, r.hits), std::nullopt}};
  RequirementsDoc doc = complete_with_retries(backend, std::move(messages), kRequirementsFormat,
                                              [](const std::string& reply) {
                                                return parse_requirements(reply);
                                              });
  doc.provenance = r.chunk_ids;
  doc.warnings = r.warnings;
  return doc;
}

ReviewVerdict review_design(const DesignUnderReview& design, const RequirementsDoc& requirements,
                            const AgentContext& ctx, const std::optional<std::string>& manager_note) {
  const ChatBackend& backend = backend_of(ctx);
  if (!design.profile) throw Error(errc::domain, "review_design needs a profile");
  const bool vision = backend.capabilities().vision;

  std::string task = "Design review of Design ID-" + std::to_string(design.design_id) + ".\n";
  task += params_block(design.params);
  task += "cl: " + format_fixed(design.aero.cl, 4) + "\ncd: " + format_fixed(design.aero.cd, 5) +
          "\ncm: " + format_fixed(design.aero.cm, 4) +
          "\nl_over_d: " + format_fixed(design.aero.l_over_d, 2) + "\n";
  if (!vision) task += geometry_summary(*design.profile) + "\n";
  task += "\nFunctional requirements:\n";
  for (const auto& f : requirements.functional) task += "- " + f + "\n";
  task += "Non-functional requirements:\n";
  for (const auto& f : requirements.non_functional) task += "- " + f + "\n";
  if (manager_note) {
    task += "\nManager comment: " + *manager_note +
            "\nInclude the Manager comment word for word in your feedback.\n";
  }
  task += "\n" + std::string(kReviewFormat);

  const Retrieval r = maybe_retrieve(
      "review of airfoil with " + params_block(design.params) + "cl " +
          format_fixed(design.aero.cl, 4),
      ctx);
  ChatMessage user{Role::user, augment_prompt(task, r.hits), std::nullopt};
  if (vision) {
    user.image = ImageAttachment{"image/png", rasterize_profile_png(*design.profile)};
  }
  std::vector<ChatMessage> messages{
      {Role::system, resource_text("systems_engineer_role"), std::nullopt}, std::move(user)};
  ReviewVerdict v = complete_with_retries(
      backend, std::move(messages), kReviewFormat,
      [&](const std::string& reply) { return parse_review(reply, design.design_id); });
  if (manager_note && v.feedback.find(*manager_note) == std::string::npos) {
    v.feedback += (v.feedback.empty() ? "" : "\n\n") + std::string("Manager comment: ") + *manager_note;
  }
  v.vision_fallback = !vision;
  v.provenance = r.chunk_ids;
  return v;
}

RevisionProposal propose_revision(const ReviewVerdict& feedback, const DesignParams& current,
                                  int revision_number, const DesignSpace& space,
                                  const AgentContext& ctx) {
  const ChatBackend& backend = backend_of(ctx);
  if (feedback.verdict != Verdict::invalid || trim(feedback.feedback).empty()) {
    throw Error(errc::domain, "propose_revision needs an invalid verdict with feedback");
  }
  std::string task = "Design revision number: " + std::to_string(revision_number) +
                     "\nRevise Design ID-" + std::to_string(feedback.design_id) +
                     ". Current parameters:\n" + params_block(current) +
                     "\nReview feedback:\n" + feedback.feedback + "\n\n" + kRevisionFormat;
  const Retrieval r = maybe_retrieve(feedback.feedback, ctx);
  std::vector<ChatMessage> messages{
      {Role::system, resource_text("design_engineer_role"), std::nullopt},
      {Role::user, augment_prompt(task, r.hits), std::nullopt}};
  const ParsedRevision parsed = complete_with_retries(
      backend, std::move(messages), kRevisionFormat,
      [](const std::string& reply) { return parse_revision(reply); });

  const DesignParams proposed(parsed.max_camber, parsed.camber_location, parsed.max_thickness);
  const double violation = space.relative_violation(proposed);
  if (violation > 0.01) {
    throw Error(errc::out_of_space,
                "proposal (" + fmt_param(parsed.max_camber) + ", " +
                    fmt_param(parsed.camber_location) + ", " + fmt_param(parsed.max_thickness) +
                    ") lies " + format_fixed(100.0 * violation, 1) +
                    "% of an axis width outside the design space");
  }
  RevisionProposal out{space.clamp(proposed), parsed.rationale, feedback.design_id, violation > 0.0,
                       r.chunk_ids};
  return out;
}

}  // namespace aerodesign
