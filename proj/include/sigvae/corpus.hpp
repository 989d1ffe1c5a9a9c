// Language corpus: one greedy message per object, exchanged between training,
// metrics, and the CLI as JSON lines {"object": [...], "message": [...]}.
#pragma once

#include <string>
#include <vector>

#include "sigvae/game.hpp"

namespace sigvae::corpus {

struct Entry {
    game::AttValObject object;
    game::Message message;
};

using Corpus = std::vector<Entry>;

void write_jsonl(const Corpus& corpus, const std::string& path);

// Throws with the 1-based line number on malformed input; validates that each
// message terminates in a single eos.
Corpus read_jsonl(const std::string& path);

}  // namespace sigvae::corpus
