#pragma once

#include <cstddef>
#include <vector>

#include "deixis/adapter.hpp"
#include "deixis/matrix.hpp"

namespace deixis {

enum class TokenKind { Question, Visual, Key, Answer };

/// One visual frame's token block (placeholder embeddings at desk scale).
struct VisualTokenBlock {
    int frame_index = 0;
    std::vector<Vector> tokens; // n_vis embeddings of width d
};

struct SequenceElement {
    TokenKind kind = TokenKind::Question;
    int frame_index = -1; // meaningful for Visual and Key tokens
    Vector embedding;
};

/// Token-level sequence: question tokens, then per frame the visual tokens
/// followed by the frame's key token when the gate passed it, then answer
/// tokens. L counts every token.
struct InterleavedSequence {
    std::vector<SequenceElement> elements;

    std::size_t length() const { return elements.size(); }

    std::size_t key_token_count() const {
        std::size_t n = 0;
        for (const auto& e : elements) {
            if (e.kind == TokenKind::Key) ++n;
        }
        return n;
    }

    /// Index of the first answer token; scoring pools strictly before it.
    std::size_t answer_start() const {
        for (std::size_t i = 0; i < elements.size(); ++i) {
            if (elements[i].kind == TokenKind::Answer) return i;
        }
        return elements.size();
    }
};

/// Lays out the sequence of question, per-frame visual+key, and answer
/// tokens. hand_tokens[i] absent means no key token for that frame.
InterleavedSequence interleave(const std::vector<Vector>& question_tokens,
                               const std::vector<VisualTokenBlock>& visual_blocks,
                               const std::vector<HandIntentToken>& hand_tokens,
                               const std::vector<Vector>& answer_tokens);

/// Fraction of the sequence occupied by key tokens: #KeyTokens / L.
double token_overhead(const InterleavedSequence& seq);

} // namespace deixis
