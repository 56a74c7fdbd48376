#include "calmdesk/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "calmdesk/errors.hpp"

namespace calmdesk {

namespace {

constexpr std::array<std::pair<TemplateId, std::string_view>, 12> kTemplateNames{{
    {TemplateId::complaint_init, "complaint_init"},
    {TemplateId::uncivil_reply, "uncivil_reply"},
    {TemplateId::civil_reply, "civil_reply"},
    {TemplateId::representative_reply, "representative_reply"},
    {TemplateId::history_contextualize, "history_contextualize"},
    {TemplateId::situation, "situation"},
    {TemplateId::thought, "thought"},
    {TemplateId::thought_paraphrase, "thought_paraphrase"},
    {TemplateId::reframe, "reframe"},
    {TemplateId::reframe_paraphrase, "reframe_paraphrase"},
    {TemplateId::info_guide, "info_guide"},
    {TemplateId::response_cues, "response_cues"},
}};

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

// Returns the end of a "{name}" placeholder starting at pos, or npos.
std::size_t placeholder_end(std::string_view body, std::size_t pos) {
    if (body[pos] != '{') return std::string_view::npos;
    std::size_t i = pos + 1;
    while (i < body.size() && is_name_char(body[i])) ++i;
    if (i == pos + 1 || i >= body.size() || body[i] != '}') return std::string_view::npos;
    return i + 1;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::string_view to_string(TemplateId id) {
    for (const auto& [key, name] : kTemplateNames)
        if (key == id) return name;
    throw UnknownTemplateError("unknown template id");
}

TemplateId template_id_from_string(std::string_view name) {
    for (const auto& [key, n] : kTemplateNames)
        if (n == name) return key;
    throw UnknownTemplateError("unknown template: " + std::string(name));
}

std::set<std::string, std::less<>> placeholders_in(std::string_view body) {
    std::set<std::string, std::less<>> names;
    for (std::size_t i = 0; i < body.size(); ++i) {
        const auto end = placeholder_end(body, i);
        if (end == std::string_view::npos) continue;
        names.emplace(body.substr(i + 1, end - i - 2));
        i = end - 1;
    }
    return names;
}

PromptTemplate::PromptTemplate(TemplateId id, std::string body)
    : id_(id), body_(std::move(body)), required_(placeholders_in(body_)) {}

std::string PromptTemplate::render(const Bindings& bindings) const {
    for (const auto& name : required_)
        if (bindings.find(name) == bindings.end()) throw MissingBindingError(name);

    std::string out;
    out.reserve(body_.size());
    const std::string_view body = body_;
    for (std::size_t i = 0; i < body.size(); ++i) {
        const auto end = placeholder_end(body, i);
        if (end == std::string_view::npos) {
            out += body[i];
            continue;
        }
        out += bindings.find(body.substr(i + 1, end - i - 2))->second;
        i = end - 1;
    }
    return out;
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& dir) {
    PromptRegistry reg;
    for (const auto id : kAllTemplates) {
        auto body = read_file(dir / (std::string(to_string(id)) + ".txt"));
        while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
        reg.add(PromptTemplate(id, std::move(body)));
    }
    return reg;
}

void PromptRegistry::add(PromptTemplate tmpl) {
    const auto id = tmpl.id();
    templates_.insert_or_assign(id, std::move(tmpl));
}

const PromptTemplate& PromptRegistry::get(TemplateId id) const {
    const auto it = templates_.find(id);
    if (it == templates_.end()) throw UnknownTemplateError("template not loaded: " + std::string(to_string(id)));
    return it->second;
}

std::string PromptRegistry::render(TemplateId id, const Bindings& bindings) const {
    return get(id).render(bindings);
}

// --- few-shot pools -------------------------------------------------------

std::string_view to_string(ExampleKind kind) {
    switch (kind) {
    case ExampleKind::complaint: return "complaint";
    case ExampleKind::thought: return "thought";
    case ExampleKind::reframe: return "reframe";
    }
    return "complaint";
}

std::span<const std::string_view> required_fields(ExampleKind kind) {
    static constexpr std::array<std::string_view, 3> complaint{"category", "domain", "complaint"};
    static constexpr std::array<std::string_view, 2> thought{"situation", "thought"};
    static constexpr std::array<std::string_view, 3> reframe{"situation", "thought", "reframe"};
    switch (kind) {
    case ExampleKind::complaint: return complaint;
    case ExampleKind::thought: return thought;
    case ExampleKind::reframe: return reframe;
    }
    return complaint;
}

const std::string& FewShotExample::field(std::string_view name) const {
    const auto it = payload.find(name);
    if (it == payload.end()) throw PreconditionError("example lacks field " + std::string(name));
    return it->second;
}

void FewShotExample::validate() const {
    const auto fields = required_fields(kind);
    if (payload.size() != fields.size())
        throw ParseError("example " + source_id + " must have exactly the " + std::string(to_string(kind)) + " fields");
    for (const auto f : fields) {
        const auto it = payload.find(f);
        if (it == payload.end() || it->second.empty())
            throw ParseError("example " + source_id + " has empty or missing field " + std::string(f));
    }
}

void ExamplePool::validate() const {
    if (examples.empty()) throw ParseError("example pool is empty");
    for (const auto& e : examples) {
        if (e.kind != kind) throw ParseError("example pool mixes kinds");
        e.validate();
    }
}

ExamplePool load_pool(const std::filesystem::path& path, ExampleKind kind, std::uint64_t selection_seed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open example pool " + path.string());
    ExamplePool pool{kind, {}, selection_seed};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        FewShotExample ex;
        ex.kind = kind;
        ex.source_id = j.value("source_id", path.stem().string() + "-" + std::to_string(lineno));
        for (const auto f : required_fields(kind)) {
            if (!j.contains(f)) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": missing " + std::string(f));
            ex.payload.emplace(std::string(f), j.at(std::string(f)).get<std::string>());
        }
        pool.examples.push_back(std::move(ex));
    }
    pool.validate();
    return pool;
}

namespace {

// Uniform index in [0, n) by rejection on the raw 64-bit stream, so the
// sequence depends only on mt19937_64, which the standard pins down exactly.
std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

} // namespace

std::vector<FewShotExample> sample_examples(const ExamplePool& pool, std::size_t count,
                                            std::span<const FieldConstraint> constraints) {
    if (count == 0) throw PreconditionError("count must be positive");

    std::vector<const FewShotExample*> candidates;
    for (const auto& e : pool.examples) {
        const bool ok = std::all_of(constraints.begin(), constraints.end(), [&](const FieldConstraint& c) {
            const auto it = e.payload.find(c.first);
            return it != e.payload.end() && it->second == c.second;
        });
        if (ok) candidates.push_back(&e);
    }
    if (count > candidates.size())
        throw InsufficientExamplesError("requested " + std::to_string(count) + " examples but only " +
                                        std::to_string(candidates.size()) + " satisfy the constraints");

    std::mt19937_64 rng(pool.selection_seed);
    for (std::size_t i = candidates.size(); i > 1; --i) std::swap(candidates[i - 1], candidates[bounded(rng, i)]);

    std::vector<FewShotExample> picked;
    if (pool.kind != ExampleKind::complaint) {
        for (std::size_t i = 0; i < count; ++i) picked.push_back(*candidates[i]);
        return picked;
    }

    std::set<std::string> categories, domains;
    std::set<std::pair<std::string, std::string>> pairs;
    std::vector<bool> used(candidates.size(), false);
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t best = candidates.size();
        int best_score = -1;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (used[i]) continue;
            const auto& c = candidates[i]->field("category");
            const auto& d = candidates[i]->field("domain");
            const int score = 4 * !categories.count(c) + 2 * !domains.count(d) + !pairs.count({c, d});
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        used[best] = true;
        const auto& e = *candidates[best];
        categories.insert(e.field("category"));
        domains.insert(e.field("domain"));
        pairs.insert({e.field("category"), e.field("domain")});
        picked.push_back(e);
    }
    return picked;
}

std::string format_examples(std::span<const FewShotExample> examples) {
    std::string out;
    for (const auto& e : examples) {
        if (!out.empty()) out += "\n\n";
        switch (e.kind) {
        case ExampleKind::complaint:
            out += "Category: " + e.field("category") + "\nDomain: " + e.field("domain") +
                   "\nComplaint: " + e.field("complaint") + "\\";
            break;
        case ExampleKind::thought:
            out += "Situation: " + e.field("situation") + "\\\nThought: " + e.field("thought") + "\\";
            break;
        case ExampleKind::reframe:
            out += "Situation: " + e.field("situation") + "\\\nThought: " + e.field("thought") +
                   "\\\nReframe: " + e.field("reframe") + "\\";
            break;
        }
    }
    return out;
}

PromptKit PromptKit::load(const std::filesystem::path& assets_dir, std::uint64_t selection_seed) {
    return PromptKit{
        PromptRegistry::load(assets_dir / "prompts"),
        load_pool(assets_dir / "examples" / "complaint.jsonl", ExampleKind::complaint, selection_seed),
        load_pool(assets_dir / "examples" / "thought.jsonl", ExampleKind::thought, selection_seed),
        load_pool(assets_dir / "examples" / "reframe.jsonl", ExampleKind::reframe, selection_seed),
    };
}

// --- chain helpers --------------------------------------------------------

std::string trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string complete_prompt(const ChainEnv& env, std::string prompt) {
    const std::array<PromptMessage, 1> messages{PromptMessage{Role::user, std::move(prompt)}};
    return complete(messages, env.params, env.backend);
}

std::string with_history(std::string body, std::span<const ChatTurn> history, std::string_view latest_label,
                         std::string_view latest) {
    body += "\n\nChat history:\n";
    body += history.empty() ? std::string("(none)") : format_history(history);
    body += "\n\n";
    body += latest_label;
    body += ": ";
    body += latest;
    return body;
}

std::string contextualize_history(std::span<const ChatTurn> history, const std::string& latest,
                                  const ChainEnv& env) {
    if (latest.empty()) throw PreconditionError("latest message must be non-empty");
    if (history.empty()) return latest;
    const auto prompt = with_history(env.kit.registry.render(TemplateId::history_contextualize, {}), history,
                                     "Latest question", latest);
    auto rewritten = trim(complete_prompt(env, prompt));
    return rewritten.empty() ? latest : rewritten;
}

} // namespace calmdesk
