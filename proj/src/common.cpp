#include "relaynet/common.hpp"

namespace relaynet {

std::string to_string(const Var& v) {
    switch (v.kind) {
        case VarKind::Input: return "X" + std::to_string(v.node);
        case VarKind::Output: return "Y" + std::to_string(v.node);
        case VarKind::Compression: return "Yhat" + std::to_string(v.node);
    }
    return "?";
}

std::vector<uint32_t> subsets_by_cardinality(int poolSize) {
    std::vector<uint32_t> out;
    out.reserve(size_t{1} << poolSize);
    for (int card = 0; card <= poolSize; ++card) {
        // Combinations in lexicographic order of their element lists.
        std::vector<int> idx(card);
        for (int i = 0; i < card; ++i) idx[i] = i;
        while (true) {
            uint32_t m = 0;
            for (int i : idx) m |= 1u << i;
            out.push_back(m);
            if (card == 0) break;
            int i = card - 1;
            while (i >= 0 && idx[i] == poolSize - card + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < card; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

std::vector<int> mask_to_positions(uint32_t mask) {
    std::vector<int> pos;
    for (int i = 0; mask; ++i, mask >>= 1)
        if (mask & 1u) pos.push_back(i);
    return pos;
}

}  // namespace relaynet
