#include "edos/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "edos/rng.hpp"

namespace edos {

namespace {

const std::vector<double>& table2_proportions() {
    static const std::vector<double> p = {310.0 / 3398.0, 1590.0 / 3398.0, 1165.0 / 3398.0,
                                          333.0 / 3398.0};
    return p;
}

const std::vector<double>& table3_proportions() {
    static const std::vector<double> p = {
        56.0 / 3398.0,  254.0 / 3398.0, 717.0 / 3398.0, 673.0 / 3398.0,
        200.0 / 3398.0, 637.0 / 3398.0, 417.0 / 3398.0, 64.0 / 3398.0,
        47.0 / 3398.0,  75.0 / 3398.0,  258.0 / 3398.0};
    return p;
}

const std::vector<std::string>& builtin_fillers() {
    static const std::vector<std::string> words = {
        "people", "online", "today", "thread", "post",   "reply",  "comment", "group",
        "friend", "story",  "point", "issue",  "debate", "topic",  "forum",   "place",
        "thing",  "words",  "video", "phrase", "moment", "always", "never",   "often",
        "maybe",  "still",  "quite", "really", "about",  "around", "under",   "again",
        "other",  "every",  "small", "large",  "plain",  "early",  "later",   "those",
    };
    return words;
}

void check_proportions(const std::vector<double>& p, std::size_t expected, const char* what) {
    if (p.size() != expected)
        throw std::invalid_argument(std::string("SyntheticSpec: ") + what + " must have " +
                                    std::to_string(expected) + " entries");
    double sum = 0.0;
    for (double x : p) {
        if (x < 0.0) throw std::invalid_argument(std::string("SyntheticSpec: negative ") + what);
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument(std::string("SyntheticSpec: ") + what + " must sum to 1");
}

std::string build_text(Rng& rng, const std::vector<std::string>& pool,
                       const std::vector<std::string>& markers, double pattern_strength,
                       std::size_t min_words, std::size_t max_words) {
    const std::size_t n = min_words + rng.uniform_int(max_words - min_words + 1);
    std::vector<std::string> words;
    words.reserve(n + markers.size());
    for (std::size_t i = 0; i < n; ++i) words.push_back(pool[rng.uniform_int(pool.size())]);
    for (const auto& marker : markers) {
        const double coin = rng.uniform();
        const std::size_t pos = rng.uniform_int(words.size() + 1);
        if (coin < pattern_strength) words.insert(words.begin() + pos, marker);
    }
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) text.push_back(' ');
        text += words[i];
    }
    return text;
}

} // namespace

std::vector<std::size_t> proportional_counts(std::size_t total, const std::vector<double>& p) {
    std::vector<std::size_t> counts(p.size());
    std::vector<std::pair<double, std::size_t>> fractions(p.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double quota = total * p[i];
        counts[i] = static_cast<std::size_t>(std::floor(quota));
        fractions[i] = {quota - std::floor(quota), i};
        assigned += counts[i];
    }
    std::stable_sort(fractions.begin(), fractions.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) counts[fractions[r % p.size()].second]++;
    return counts;
}

SyntheticSpec SyntheticSpec::with_defaults(std::size_t total, std::uint64_t seed,
                                           double pattern_strength) {
    SyntheticSpec spec;
    spec.total_count = total;
    spec.rng_seed = seed;
    spec.pattern_strength = pattern_strength;
    return spec;
}

void SyntheticSpec::validate() const {
    if (total_count == 0) throw std::invalid_argument("SyntheticSpec: total_count must be positive");
    if (sexist_fraction <= 0.0 || sexist_fraction >= 1.0)
        throw std::invalid_argument("SyntheticSpec: sexist_fraction must be in (0,1)");
    if (pattern_strength < 0.0 || pattern_strength > 1.0)
        throw std::invalid_argument("SyntheticSpec: pattern_strength must be in [0,1]");
    if (!category_proportions.empty())
        check_proportions(category_proportions, TaskLabelSet::for_task(Task::B).size(),
                          "category_proportions");
    if (!vector_proportions.empty())
        check_proportions(vector_proportions, TaskLabelSet::for_task(Task::C).size(),
                          "vector_proportions");
    if (min_words < 1 || max_words < min_words)
        throw std::invalid_argument("SyntheticSpec: bad word count range");
    if (max_words + 3 >= 64)
        throw std::invalid_argument("SyntheticSpec: texts must stay under 64 words");
    if (unlabeled_templates == 0)
        throw std::invalid_argument("SyntheticSpec: unlabeled_templates must be positive");
}

std::string class_marker_sexist(int sexist) {
    return sexist == kSexist ? "amark1" : "amark0";
}
std::string class_marker_category(int index) { return "bmark" + std::to_string(index); }
std::string class_marker_vector(int index) { return "cmark" + std::to_string(index); }

std::vector<LabeledExample> generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const auto& cat_props = spec.category_proportions.empty() ? table2_proportions()
                                                              : spec.category_proportions;
    const auto& vec_props = spec.vector_proportions.empty() ? table3_proportions()
                                                            : spec.vector_proportions;
    const std::size_t n_vector_classes = vec_props.size();

    const auto level_a =
        proportional_counts(spec.total_count, {1.0 - spec.sexist_fraction, spec.sexist_fraction});
    const std::size_t n_sexist = level_a[1];
    if (n_sexist < n_vector_classes)
        throw std::invalid_argument(
            "generate_synthetic: total_count gives " + std::to_string(n_sexist) +
            " sexist examples, fewer than the " + std::to_string(n_vector_classes) +
            " fine-grained classes");

    const auto per_category = proportional_counts(n_sexist, cat_props);

    // Vector classes allocated within their parent category, renormalized.
    std::vector<std::size_t> per_vector(n_vector_classes, 0);
    for (std::size_t cat = 0; cat < per_category.size(); ++cat) {
        std::vector<double> within;
        std::vector<std::size_t> members;
        double mass = 0.0;
        for (std::size_t v = 0; v < n_vector_classes; ++v)
            if (category_of_vector(static_cast<int>(v)) == static_cast<int>(cat)) {
                members.push_back(v);
                mass += vec_props[v];
            }
        if (mass <= 0.0)
            throw std::invalid_argument("generate_synthetic: category " + std::to_string(cat) +
                                        " has zero vector mass");
        for (std::size_t v : members) within.push_back(vec_props[v] / mass);
        const auto alloc = proportional_counts(per_category[cat], within);
        for (std::size_t i = 0; i < members.size(); ++i) per_vector[members[i]] = alloc[i];
    }

    struct LabelTriple {
        int sexist;
        std::optional<int> category;
        std::optional<int> vec;
    };
    std::vector<LabelTriple> triples;
    triples.reserve(spec.total_count);
    for (std::size_t i = 0; i < level_a[0]; ++i) triples.push_back({kNotSexist, {}, {}});
    for (std::size_t v = 0; v < n_vector_classes; ++v)
        for (std::size_t i = 0; i < per_vector[v]; ++i)
            triples.push_back(
                {kSexist, category_of_vector(static_cast<int>(v)), static_cast<int>(v)});

    Rng rng = Rng(spec.rng_seed).split("synthetic");
    for (std::size_t i = triples.size(); i > 1; --i)
        std::swap(triples[i - 1], triples[rng.uniform_int(i)]);

    const auto& pool = spec.vocab_seed_words.empty() ? builtin_fillers() : spec.vocab_seed_words;
    std::vector<LabeledExample> out;
    out.reserve(spec.total_count);
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const auto& t = triples[i];
        std::vector<std::string> markers = {class_marker_sexist(t.sexist)};
        if (t.sexist == kSexist) {
            markers.push_back(class_marker_category(*t.category));
            markers.push_back(class_marker_vector(*t.vec));
        }
        char id[32];
        std::snprintf(id, sizeof(id), "syn%06zu", i);
        out.push_back(LabeledExample::make(
            id, build_text(rng, pool, markers, spec.pattern_strength, spec.min_words, spec.max_words),
            t.sexist, t.category, t.vec));
    }
    return out;
}

std::vector<std::string> generate_unlabeled(const SyntheticSpec& spec, std::size_t count) {
    spec.validate();
    const auto& pool = spec.vocab_seed_words.empty() ? builtin_fillers() : spec.vocab_seed_words;
    const std::size_t n_vector_classes =
        spec.vector_proportions.empty() ? table3_proportions().size() : spec.vector_proportions.size();

    // Fixed sentences, one per template id; repetition is what makes the
    // held-out masked-LM split learnable at this scale.
    auto template_line = [&](std::size_t t) {
        Rng tr = Rng(spec.rng_seed).split("unlabeled-template").split(t);
        const std::size_t n = spec.min_words + tr.uniform_int(spec.max_words - spec.min_words + 1);
        std::vector<std::string> words;
        for (std::size_t i = 0; i < n; ++i) words.push_back(pool[tr.uniform_int(pool.size())]);
        const std::size_t cls = t % (n_vector_classes + 1);
        if (cls == n_vector_classes) {
            words.insert(words.begin() + tr.uniform_int(words.size() + 1),
                         class_marker_sexist(kNotSexist));
        } else {
            const int v = static_cast<int>(cls);
            words.insert(words.begin() + tr.uniform_int(words.size() + 1),
                         class_marker_sexist(kSexist));
            words.insert(words.begin() + tr.uniform_int(words.size() + 1),
                         class_marker_category(category_of_vector(v)));
            words.insert(words.begin() + tr.uniform_int(words.size() + 1), class_marker_vector(v));
        }
        std::string line;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) line.push_back(' ');
            line += words[i];
        }
        return line;
    };

    std::vector<std::string> templates(spec.unlabeled_templates);
    for (std::size_t t = 0; t < templates.size(); ++t) templates[t] = template_line(t);

    Rng rng = Rng(spec.rng_seed).split("unlabeled");
    std::vector<std::string> lines;
    lines.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        lines.push_back(templates[rng.uniform_int(templates.size())]);
    return lines;
}

} // namespace edos
