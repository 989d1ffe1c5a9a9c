#include "sigvae/corpus.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sigvae::corpus {

using json = nlohmann::json;

void write_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_jsonl: cannot open " + path);
    for (const Entry& e : corpus) {
        json line;
        line["object"] = e.object.values;
        line["message"] = e.message.symbols;
        out << line.dump() << "\n";
    }
    if (!out) throw std::runtime_error("write_jsonl: write failed for " + path);
}

Corpus read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_jsonl: cannot open " + path);
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("read_jsonl: " + where + ": " + e.what());
        }
        if (!j.contains("object") || !j.contains("message"))
            throw std::runtime_error("read_jsonl: " + where + ": missing object/message field");
        Entry e;
        e.object.values = j["object"].get<std::vector<int>>();
        e.message.symbols = j["message"].get<std::vector<int>>();
        if (e.object.values.empty())
            throw std::runtime_error("read_jsonl: " + where + ": empty object");
        const auto& s = e.message.symbols;
        if (s.empty() || s.back() != game::kEosId)
            throw std::runtime_error("read_jsonl: " + where + ": message must end with eos");
        for (std::size_t i = 0; i + 1 < s.size(); ++i)
            if (s[i] == game::kEosId)
                throw std::runtime_error("read_jsonl: " + where + ": interior eos");
        corpus.push_back(std::move(e));
    }
    return corpus;
}

}  // namespace sigvae::corpus
