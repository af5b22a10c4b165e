#include "awblstm/synthetic.hpp"

#include <array>
#include <set>
#include <sstream>

#include "awblstm/errors.hpp"
#include "awblstm/pos_tagger.hpp"
#include "awblstm/rng.hpp"

namespace awblstm {

namespace {

const std::vector<std::string> kFillers{
    "patients", "data",     "plasma",    "oral",       "dose",     "daily",
    "therapy",  "treatment", "levels",   "study",      "clinical", "reported",
    "observed", "single",   "repeated",  "healthy",    "subjects", "volunteers",
    "tablet",   "capsule",  "regimen",   "baseline",   "serum",    "blood",
    "sample",   "trial",    "cohort",    "group",      "adult",    "elderly",
    "fasting",  "steady",   "state",     "period",     "marked",   "routine"};

const std::vector<std::string> kDrugs{
    "alprazim",  "betaxolon", "cardiprene", "dexofent",  "eximab",   "fluraxel",
    "gabitrol",  "hepradin",  "ibrenox",    "jatrolam",  "ketramid", "lovatrex",
    "metrazil",  "nortivan",  "oxaprim",    "pexotine",  "quinazol", "ritonex",
    "sertalin",  "talvexin",  "ursodil",    "vexamid",   "zolpitran", "welfaxin"};

std::vector<std::vector<std::string>> split_phrases(
    const std::vector<std::string>& phrases) {
    std::vector<std::vector<std::string>> out;
    for (const std::string& p : phrases) {
        std::istringstream is(p);
        std::vector<std::string> toks;
        std::string t;
        while (is >> t) toks.push_back(t);
        out.push_back(std::move(toks));
    }
    return out;
}

}  // namespace

const std::vector<std::vector<std::vector<std::string>>>& trigger_lexicons() {
    static const std::vector<std::vector<std::vector<std::string>>> lexicons = [] {
        std::vector<std::vector<std::vector<std::string>>> l(kNumClasses);
        l[static_cast<int>(Label::Advice)] = split_phrases({
            "should not be combined with",
            "coadministration is not recommended with",
            "use caution when prescribing with",
            "avoid concurrent use with",
        });
        l[static_cast<int>(Label::Effect)] = split_phrases({
            "enhances the sedative action of",
            "potentiates the hypotensive response to",
            "augments the anticoagulant activity of",
            "intensifies the adverse reactions of",
        });
        l[static_cast<int>(Label::Mechanism)] = split_phrases({
            "inhibits the hepatic metabolism of",
            "reduces the renal clearance of",
            "slows the absorption rate of",
            "accelerates the elimination kinetics of",
        });
        l[static_cast<int>(Label::Int)] = split_phrases({
            "interacts measurably with",
            "exhibits documented interplay with",
            "shows pharmacologic interference alongside",
            "displays known crosstalk with",
        });
        l[static_cast<int>(Label::Other)] = split_phrases({
            "was studied separately from",
            "showed no measurable relation to",
            "remained independent of exposure to",
            "was catalogued without reference to",
        });
        return l;
    }();
    return lexicons;
}

namespace {

PairInstance make_instance(Label label, Rng& rng, const std::string& sentence_id) {
    const auto& phrases = trigger_lexicons()[static_cast<std::size_t>(label)];
    const auto& trigger = phrases[rng.uniform_index(phrases.size())];

    auto filler = [&rng]() { return kFillers[rng.uniform_index(kFillers.size())]; };
    const std::string drug1 = kDrugs[rng.uniform_index(kDrugs.size())];
    std::string drug2 = kDrugs[rng.uniform_index(kDrugs.size())];
    while (drug2 == drug1) drug2 = kDrugs[rng.uniform_index(kDrugs.size())];

    std::vector<std::string> surfaces;
    const std::size_t n_before = rng.uniform_index(4);
    const std::size_t n_gap1 = rng.uniform_index(3);
    const std::size_t n_gap2 = rng.uniform_index(3);
    const std::size_t n_after = rng.uniform_index(4);

    for (std::size_t i = 0; i < n_before; ++i) surfaces.push_back(filler());
    const std::size_t e1_pos = surfaces.size();
    surfaces.push_back(drug1);
    for (std::size_t i = 0; i < n_gap1; ++i) surfaces.push_back(filler());
    surfaces.insert(surfaces.end(), trigger.begin(), trigger.end());
    for (std::size_t i = 0; i < n_gap2; ++i) surfaces.push_back(filler());
    const std::size_t e2_pos = surfaces.size();
    surfaces.push_back(drug2);
    for (std::size_t i = 0; i < n_after; ++i) surfaces.push_back(filler());
    surfaces.push_back(".");

    PairInstance inst;
    inst.sentence_id = sentence_id;
    inst.e1_span = TokenSpan{e1_pos, e1_pos};
    inst.e2_span = TokenSpan{e2_pos, e2_pos};
    inst.label = label;
    inst.tokens.reserve(surfaces.size());
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        inst.tokens.push_back(Token{surfaces[i], heuristic_pos_tag(surfaces[i]),
                                    token_distance(i, inst.e1_span),
                                    token_distance(i, inst.e2_span)});
    }
    return inst;
}

std::string sentence_key(const PairInstance& inst) {
    std::string key;
    for (const Token& t : inst.tokens) {
        key += t.surface;
        key += ' ';
    }
    return key;
}

}  // namespace

SynthCorpus generate_synthetic_corpus(const SynthConfig& config, std::uint64_t seed) {
    if (config.train_size == 0 || config.test_size == 0) {
        throw ValidationError("synthetic corpus sizes must be positive");
    }
    Rng rng = Rng::substream(seed, "synth");
    std::set<std::string> seen;

    auto draw = [&](std::size_t index, const std::string& prefix) {
        const Label label = config.balanced
                                ? static_cast<Label>(index % kNumClasses)
                                : static_cast<Label>(rng.uniform_index(kNumClasses));
        // Re-draw until the sentence is new; the token pools make collisions
        // rare, so this terminates quickly and stays deterministic.
        for (int attempt = 0;; ++attempt) {
            PairInstance inst =
                make_instance(label, rng, prefix + std::to_string(index));
            if (seen.insert(sentence_key(inst)).second) return inst;
            if (attempt > 200) {
                throw ValidationError("cannot generate enough distinct sentences");
            }
        }
    };

    SynthCorpus corpus;
    corpus.train.reserve(config.train_size);
    corpus.test.reserve(config.test_size);
    for (std::size_t i = 0; i < config.train_size; ++i) {
        corpus.train.push_back(draw(i, "synth.train.s"));
    }
    for (std::size_t i = 0; i < config.test_size; ++i) {
        corpus.test.push_back(draw(i, "synth.test.s"));
    }
    return corpus;
}

std::optional<Label> trigger_lookup_oracle(const PairInstance& instance) {
    const auto& lexicons = trigger_lexicons();
    for (std::size_t cls = 0; cls < lexicons.size(); ++cls) {
        for (const auto& phrase : lexicons[cls]) {
            if (phrase.size() > instance.tokens.size()) continue;
            for (std::size_t start = 0; start + phrase.size() <= instance.tokens.size();
                 ++start) {
                bool match = true;
                for (std::size_t k = 0; k < phrase.size(); ++k) {
                    if (instance.tokens[start + k].surface != phrase[k]) {
                        match = false;
                        break;
                    }
                }
                if (match) return static_cast<Label>(cls);
            }
        }
    }
    return std::nullopt;
}

Label majority_label(const std::vector<PairInstance>& instances) {
    std::array<std::size_t, kNumClasses> counts{};
    for (const PairInstance& inst : instances) {
        counts[static_cast<std::size_t>(inst.label)]++;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < kNumClasses; ++i) {
        if (counts[i] > counts[best]) best = i;
    }
    return static_cast<Label>(best);
}

}  // namespace awblstm
