#include "awblstm/instance_io.hpp"

#include <fstream>

#include <json.hpp>

#include "awblstm/errors.hpp"

namespace awblstm {

using nlohmann::json;

std::string instance_to_json_line(const PairInstance& instance) {
    json j;
    j["sentence_id"] = instance.sentence_id;
    json tokens = json::array(), tags = json::array();
    json d1 = json::array(), d2 = json::array();
    for (const Token& t : instance.tokens) {
        tokens.push_back(t.surface);
        tags.push_back(t.pos_tag);
        d1.push_back(t.dist_e1);
        d2.push_back(t.dist_e2);
    }
    j["tokens"] = std::move(tokens);
    j["pos_tags"] = std::move(tags);
    j["dist_e1"] = std::move(d1);
    j["dist_e2"] = std::move(d2);
    j["e1_span"] = json::array({instance.e1_span.first, instance.e1_span.last});
    j["e2_span"] = json::array({instance.e2_span.first, instance.e2_span.last});
    j["label"] = label_name(instance.label);
    return j.dump();
}

PairInstance instance_from_json_line(const std::string& line, std::size_t line_no,
                                     const std::string& source) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(source, line_no, std::string("bad instance JSON: ") + e.what());
    }
    try {
        PairInstance inst;
        inst.sentence_id = j.at("sentence_id").get<std::string>();
        const auto& tokens = j.at("tokens");
        const auto& tags = j.at("pos_tags");
        const auto& d1 = j.at("dist_e1");
        const auto& d2 = j.at("dist_e2");
        if (tokens.size() != tags.size() || tokens.size() != d1.size() ||
            tokens.size() != d2.size()) {
            throw ValidationError("instance field lengths disagree");
        }
        inst.tokens.reserve(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            inst.tokens.push_back(Token{tokens[i].get<std::string>(),
                                        tags[i].get<std::string>(), d1[i].get<int>(),
                                        d2[i].get<int>()});
        }
        inst.e1_span = TokenSpan{j.at("e1_span")[0].get<std::size_t>(),
                                 j.at("e1_span")[1].get<std::size_t>()};
        inst.e2_span = TokenSpan{j.at("e2_span")[0].get<std::size_t>(),
                                 j.at("e2_span")[1].get<std::size_t>()};
        inst.label = label_from_name(j.at("label").get<std::string>());
        if (inst.e1_span.last >= inst.tokens.size() ||
            inst.e2_span.last >= inst.tokens.size() ||
            inst.e1_span.first > inst.e1_span.last ||
            inst.e2_span.first > inst.e2_span.last ||
            inst.e1_span.overlaps(inst.e2_span) || inst.e2_span.first < inst.e1_span.first) {
            throw ValidationError("bad entity spans");
        }
        return inst;
    } catch (const json::exception& e) {
        throw ParseError(source, line_no, std::string("bad instance JSON: ") + e.what());
    } catch (const ValidationError& e) {
        throw ParseError(source, line_no, e.what());
    }
}

void write_instances(const std::vector<PairInstance>& instances, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    for (const PairInstance& inst : instances) {
        out << instance_to_json_line(inst) << '\n';
    }
}

std::vector<PairInstance> read_instances(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, "cannot open instance file");
    std::vector<PairInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(instance_from_json_line(line, line_no, path));
    }
    return out;
}

}  // namespace awblstm
