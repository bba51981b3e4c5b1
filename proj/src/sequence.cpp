#include "deixis/sequence.hpp"

namespace deixis {

InterleavedSequence interleave(const std::vector<Vector>& question_tokens,
                               const std::vector<VisualTokenBlock>& visual_blocks,
                               const std::vector<HandIntentToken>& hand_tokens,
                               const std::vector<Vector>& answer_tokens) {
    if (visual_blocks.size() != hand_tokens.size()) {
        throw LengthMismatch("got " + std::to_string(visual_blocks.size()) +
                             " visual blocks but " + std::to_string(hand_tokens.size()) +
                             " hand tokens");
    }
    for (std::size_t i = 0; i + 1 < visual_blocks.size(); ++i) {
        if (visual_blocks[i].frame_index >= visual_blocks[i + 1].frame_index) {
            throw LengthMismatch("visual block frame indices must strictly increase");
        }
    }

    InterleavedSequence seq;
    for (const auto& q : question_tokens) {
        seq.elements.push_back({TokenKind::Question, -1, q});
    }
    for (std::size_t t = 0; t < visual_blocks.size(); ++t) {
        const auto& block = visual_blocks[t];
        if (block.tokens.empty()) throw LengthMismatch("visual block with n_vis = 0");
        for (const auto& v : block.tokens) {
            seq.elements.push_back({TokenKind::Visual, block.frame_index, v});
        }
        if (hand_tokens[t].present()) {
            seq.elements.push_back({TokenKind::Key, block.frame_index, *hand_tokens[t].value});
        }
    }
    for (const auto& a : answer_tokens) {
        seq.elements.push_back({TokenKind::Answer, -1, a});
    }
    return seq;
}

double token_overhead(const InterleavedSequence& seq) {
    if (seq.elements.empty()) return 0.0;
    return static_cast<double>(seq.key_token_count()) /
           static_cast<double>(seq.length());
}

} // namespace deixis
