#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "calmdesk/gateway.hpp"
#include "calmdesk/transcript.hpp"

namespace calmdesk {

enum class TemplateId {
    complaint_init,
    uncivil_reply,
    civil_reply,
    representative_reply,
    history_contextualize,
    situation,
    thought,
    thought_paraphrase,
    reframe,
    reframe_paraphrase,
    info_guide,
    response_cues,
};

inline constexpr std::array kAllTemplates = {
    TemplateId::complaint_init,     TemplateId::uncivil_reply,  TemplateId::civil_reply,
    TemplateId::representative_reply, TemplateId::history_contextualize, TemplateId::situation,
    TemplateId::thought,            TemplateId::thought_paraphrase, TemplateId::reframe,
    TemplateId::reframe_paraphrase, TemplateId::info_guide,     TemplateId::response_cues,
};

std::string_view to_string(TemplateId id);
TemplateId template_id_from_string(std::string_view name);

using Bindings = std::map<std::string, std::string, std::less<>>;

// A prompt body with {name} placeholders. required_bindings is exactly the set
// of placeholder names occurring in the body.
class PromptTemplate {
public:
    PromptTemplate(TemplateId id, std::string body);

    TemplateId id() const noexcept { return id_; }
    const std::string& body() const noexcept { return body_; }
    const std::set<std::string, std::less<>>& required_bindings() const noexcept { return required_; }

    // Substitutes every placeholder occurrence in a single left-to-right pass;
    // substituted values are never rescanned.
    std::string render(const Bindings& bindings) const;

private:
    TemplateId id_;
    std::string body_;
    std::set<std::string, std::less<>> required_;
};

std::set<std::string, std::less<>> placeholders_in(std::string_view body);

class PromptRegistry {
public:
    // Reads <dir>/<id>.txt for every TemplateId.
    static PromptRegistry load(const std::filesystem::path& dir);

    void add(PromptTemplate tmpl);
    const PromptTemplate& get(TemplateId id) const;
    std::string render(TemplateId id, const Bindings& bindings) const;
    bool contains(TemplateId id) const { return templates_.count(id) != 0; }

private:
    std::map<TemplateId, PromptTemplate> templates_;
};

enum class ExampleKind { complaint, thought, reframe };

std::string_view to_string(ExampleKind kind);
std::span<const std::string_view> required_fields(ExampleKind kind);

struct FewShotExample {
    ExampleKind kind = ExampleKind::complaint;
    std::map<std::string, std::string, std::less<>> payload;
    std::string source_id;

    const std::string& field(std::string_view name) const;
    void validate() const;
};

struct ExamplePool {
    ExampleKind kind = ExampleKind::complaint;
    std::vector<FewShotExample> examples;
    std::uint64_t selection_seed = 0;

    void validate() const;
};

// One JSON object per line; blank lines skipped.
ExamplePool load_pool(const std::filesystem::path& path, ExampleKind kind, std::uint64_t selection_seed = 0);

using FieldConstraint = std::pair<std::string, std::string>;

// Seeded shuffle, then greedy picks preferring examples that add an unseen
// category, then an unseen domain, then an unseen (category, domain) pair.
// Reproducible across platforms for a fixed pool.selection_seed.
std::vector<FewShotExample> sample_examples(const ExamplePool& pool, std::size_t count,
                                            std::span<const FieldConstraint> constraints = {});

// Few-shot block in the layout the prompt listings use.
std::string format_examples(std::span<const FewShotExample> examples);

struct PromptKit {
    PromptRegistry registry;
    ExamplePool complaints;
    ExamplePool thoughts;
    ExamplePool reframes;

    static PromptKit load(const std::filesystem::path& assets_dir, std::uint64_t selection_seed = 0);
};

struct ChainEnv {
    const PromptKit& kit;
    const Backend& backend;
    CompletionParams params;
};

// Single-user-message completion helper used by every chain step.
std::string complete_prompt(const ChainEnv& env, std::string prompt);

// Rewrites `latest` into a standalone message given the preceding turns.
// Empty history returns `latest` without touching the backend.
std::string contextualize_history(std::span<const ChatTurn> history, const std::string& latest,
                                  const ChainEnv& env);

// Prompt body followed by the chat history and latest message.
std::string with_history(std::string body, std::span<const ChatTurn> history, std::string_view latest_label,
                         std::string_view latest);

std::string trim(std::string_view s);

} // namespace calmdesk
