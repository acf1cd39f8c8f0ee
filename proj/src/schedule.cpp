#include "relaynet/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace relaynet {

namespace {

long ipow(long base, int exp) {
    long r = 1;
    while (exp-- > 0) r *= base;
    return r;
}

long ceil_div(long x, long d) {
    const long q = x / d;
    const long r = x % d;
    return q + (r > 0 ? 1 : 0);
}

// Checked power against the block cap.
long total_blocks(int Mcount, long B, long cap) {
    long total = 1;
    for (int i = 0; i < Mcount + 1; ++i) {
        total *= B;
        if (total > cap)
            throw CapExceeded("B^(M+1) = " + std::to_string(B) + "^" +
                              std::to_string(Mcount + 1) + " exceeds the block cap of " +
                              std::to_string(cap));
    }
    return total;
}

void base_digits(long value, long B, int count, std::vector<int>& out) {
    out.assign(count, 0);
    for (int i = 0; i < count && value; ++i) {
        out[i] = static_cast<int>(value % B);
        value /= B;
    }
}

std::vector<DecodeEvent> make_events(int Mcount, long B, long totalBlocks, bool united) {
    std::vector<DecodeEvent> events;
    for (int k = 2; k <= Mcount + 2; ++k) {
        const long step = ipow(B, k - 1);
        const long msgStep = united ? ipow(B, k - 2) : step;
        for (long v = 1; v <= totalBlocks / step; ++v) {
            DecodeEvent e;
            e.level = k;
            e.block = v * step;
            e.firstMsg = (v - 1) * msgStep + 1;
            e.lastMsg = v * msgStep;
            events.push_back(e);
        }
    }
    std::sort(events.begin(), events.end(), [](const DecodeEvent& a, const DecodeEvent& b) {
        if (a.block != b.block) return a.block < b.block;
        return a.level < b.level;
    });
    return events;
}

}  // namespace

std::string variant_token(ScheduleVariant v) {
    return v == ScheduleVariant::BlockByBlock ? "thm1" : "thm2";
}

std::optional<ScheduleVariant> parse_variant(const std::string& s) {
    if (s == "thm1" || s == "block-by-block") return ScheduleVariant::BlockByBlock;
    if (s == "thm2" || s == "b-blocks-united") return ScheduleVariant::BlocksUnited;
    return std::nullopt;
}

long Schedule::message_of_block(long b) const {
    return variant == ScheduleVariant::BlockByBlock ? b : ceil_div(b, B);
}

std::vector<long> Schedule::transmission_arg_ids(long b, int level) const {
    // Level 1 (source) sends the fresh message of block b conditioned on
    // the lagged ones; level k sends the B^(k-1)-lagged message conditioned
    // on the deeper lags.
    std::vector<long> ids;
    const int start = (level == 1) ? 0 : level - 1;
    for (int s = start; s <= Mcount; ++s) {
        const long lagged = b - (s == 0 ? 0 : ipow(B, s));
        ids.push_back(variant == ScheduleVariant::BlockByBlock ? lagged : ceil_div(lagged, B));
    }
    return ids;
}

std::vector<MsgRef> Schedule::transmission_args(long b, int level) const {
    std::vector<MsgRef> refs;
    for (long id : transmission_arg_ids(b, level)) refs.push_back(ref(id));
    return refs;
}

long Schedule::non_dummy_count() const {
    long c = 0;
    for (long id = 1; id <= totalMessages; ++id)
        if (!msg_dummy(id)) ++c;
    return c;
}

Schedule build_schedule_thm1(int Mcount, long B, long L, long cap) {
    if (Mcount < 1) throw std::invalid_argument("Mcount must be >= 1");
    if (B < 2) throw std::invalid_argument("B must be >= 2");
    if (L < 1 || L >= B) throw std::invalid_argument("L must satisfy 1 <= L < B");
    Schedule s;
    s.variant = ScheduleVariant::BlockByBlock;
    s.Mcount = Mcount;
    s.B = B;
    s.L = L;
    s.totalBlocks = total_blocks(Mcount, B, cap);
    s.totalMessages = s.totalBlocks;
    s.dummyFlag.assign(s.totalMessages + 1, 0);
    // A block is dummy when it falls in the trailing L blocks of its
    // B-window, or in the trailing B^u blocks of any B^(u+1)-superblock,
    // u = 1..M. In base-B digits of (b-1): digit0 >= B-L, or digit_u = B-1.
    std::vector<int> digits;
    for (long id = 1; id <= s.totalMessages; ++id) {
        base_digits(id - 1, B, Mcount + 1, digits);
        bool dummy = digits[0] >= B - L;
        for (int u = 1; u <= Mcount && !dummy; ++u) dummy = digits[u] == B - 1;
        s.dummyFlag[id] = dummy ? 1 : 0;
    }
    s.decodeEvents = make_events(Mcount, B, s.totalBlocks, /*united=*/false);
    s.cfIndexOrigin.assign(s.totalBlocks + 1, 0);
    for (long b = 1; b <= s.totalBlocks; ++b) s.cfIndexOrigin[b] = b - 1;
    return s;
}

Schedule build_schedule_thm2(int Mcount, long B, long cap) {
    if (Mcount < 1) throw std::invalid_argument("Mcount must be >= 1");
    if (B < 2) throw std::invalid_argument("B must be >= 2");
    Schedule s;
    s.variant = ScheduleVariant::BlocksUnited;
    s.Mcount = Mcount;
    s.B = B;
    s.L = 0;
    s.totalBlocks = total_blocks(Mcount, B, cap);
    s.totalMessages = s.totalBlocks / B;  // B^M
    s.dummyFlag.assign(s.totalMessages + 1, 0);
    std::vector<int> digits;
    for (long g = 1; g <= s.totalMessages; ++g) {
        base_digits(g - 1, B, Mcount, digits);
        bool dummy = false;
        for (int u = 0; u < Mcount && !dummy; ++u) dummy = digits[u] == B - 1;
        s.dummyFlag[g] = dummy ? 1 : 0;
    }
    s.decodeEvents = make_events(Mcount, B, s.totalBlocks, /*united=*/true);
    s.cfIndexOrigin.assign(s.totalBlocks + 1, 0);
    for (long b = 1; b <= s.totalBlocks; ++b) s.cfIndexOrigin[b] = b - 1;
    return s;
}

std::string CausalityReport::summary() const {
    if (ok()) return "ok";
    return "violation at level " + std::to_string(violation->level) + ", block " +
           std::to_string(violation->block) + ": " + violation->detail;
}

namespace {

struct Verifier {
    const Schedule& s;
    // Per level: message id -> block at whose end it became known.
    std::map<int, std::map<long, long>> decodedAt;
    CausalityReport report;

    explicit Verifier(const Schedule& sched) : s(sched) {}

    bool fail(int level, long block, std::string detail) {
        if (report.ok()) report.violation = CausalityViolation{level, block, std::move(detail)};
        return false;
    }

    bool known(int level, long id) const {
        if (s.msg_dummy(id)) return true;
        auto lit = decodedAt.find(level);
        if (lit == decodedAt.end()) return false;
        return lit->second.count(id) > 0;
    }

    // All message arguments carried in block j must be known to the
    // decoding node, except occurrences of the step target.
    bool check_block_args(const DecodeEvent& e, long j, long target) {
        if (j < 1 || j > s.totalBlocks)
            return fail(e.level, j, "decode step refers to block outside the timetable");
        for (int level = 1; level <= s.Mcount + 1; ++level) {
            for (long id : s.transmission_arg_ids(j, level)) {
                if (id == target && target >= 1) continue;
                if (!known(e.level, id))
                    return fail(e.level, j,
                                "message m" + std::to_string(id) + " (carried by level " +
                                    std::to_string(level) +
                                    ") is neither dummy nor decoded yet");
            }
        }
        return true;
    }

    bool run_event_blockwise(const DecodeEvent& e) {
        const long span = ipow(s.B, e.level - 1);
        // Bootstrap: the trailing L blocks of the event window hold only
        // known messages so the compression indices can be recovered first.
        for (long j = e.block; j > e.block - s.L; --j)
            if (!check_block_args(e, j, 0)) return false;
        // Backward steps decode the fresh message of the immediate
        // upstream node in each block.
        const long offset = (e.level == 2) ? 0 : ipow(s.B, e.level - 2);
        for (long j = e.block - s.L; j >= std::max<long>(1, e.block - span + 1); --j) {
            const long target = j - offset;
            if (!check_block_args(e, j, target)) return false;
            if (target >= 1 && !s.msg_dummy(target)) decodedAt[e.level][target] = e.block;
        }
        return true;
    }

    bool run_event_united(const DecodeEvent& e) {
        const long offset = (e.level == 2) ? 0 : ipow(s.B, e.level - 2);
        for (long g = e.lastMsg; g >= e.firstMsg; --g) {
            if (s.msg_dummy(g)) continue;
            const long lo = (g - 1) * s.B + offset + 1;
            const long hi = g * s.B + offset;
            if (hi > e.block)
                return fail(e.level, e.block,
                            "united decoding window for m" + std::to_string(g) +
                                " extends past the event block");
            for (long j = lo; j <= hi; ++j)
                if (!check_block_args(e, j, g)) return false;
            decodedAt[e.level][g] = e.block;
        }
        return true;
    }

    bool run() {
        // Events in chronological order; each node's events use only what
        // that node decoded before.
        for (const auto& e : s.decodeEvents) {
            const bool ok = (s.variant == ScheduleVariant::BlockByBlock)
                                ? run_event_blockwise(e)
                                : run_event_united(e);
            if (!ok) return false;
            for (long id = e.firstMsg; id <= e.lastMsg; ++id)
                if (!s.msg_dummy(id) && !known(e.level, id))
                    return fail(e.level, e.block,
                                "event claims m" + std::to_string(id) +
                                    " but it was not decodable");
        }
        // Encoding causality: a relay's transmission argument must have
        // been decoded by that relay strictly before the carrying block.
        for (long b = 1; b <= s.totalBlocks; ++b) {
            for (int level = 2; level <= s.Mcount + 1; ++level) {
                for (long id : s.transmission_arg_ids(b, level)) {
                    if (s.msg_dummy(id)) continue;
                    auto& m = decodedAt[level + 0];
                    auto it = m.find(id);
                    if (it == m.end() || it->second >= b)
                        return fail(level, b,
                                    "transmission of m" + std::to_string(id) +
                                        " precedes its decoding");
                }
            }
        }
        // Compression indices: generated at the end of block b-1, usable
        // from block b on.
        for (long b = 1; b <= s.totalBlocks; ++b)
            if (s.cfIndexOrigin[b] != b - 1)
                return fail(0, b,
                            "compression index transmitted in block " + std::to_string(b) +
                                " originates at block " + std::to_string(s.cfIndexOrigin[b]) +
                                ", expected " + std::to_string(b - 1));
        return true;
    }
};

}  // namespace

CausalityReport verify_schedule(const Schedule& s) {
    Verifier v(s);
    v.run();
    return v.report;
}

Rational effective_rate_fraction(const Schedule& s) {
    return Rational(s.non_dummy_count(), s.totalMessages);
}

Rational closed_form_rate_fraction(const Schedule& s) {
    long num = 1, den = 1;
    for (int u = 0; u < s.Mcount; ++u) {
        num *= s.B - 1;
        den *= s.B;
    }
    if (s.variant == ScheduleVariant::BlockByBlock) {
        num *= s.B - s.L;
        den *= s.B;
    }
    return Rational(num, den);
}

namespace {

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string schedule_to_csv(const Schedule& s) {
    std::ostringstream os;
    os << "block,message,dummy";
    for (int level = 1; level <= s.Mcount + 1; ++level)
        os << ",x_level" << level << "_args";
    os << ",cf_index_origin,decode_events\n";
    std::map<long, std::vector<const DecodeEvent*>> eventsByBlock;
    for (const auto& e : s.decodeEvents) eventsByBlock[e.block].push_back(&e);
    for (long b = 1; b <= s.totalBlocks; ++b) {
        const long msg = s.message_of_block(b);
        os << b << "," << s.ref(msg).str() << "," << (s.msg_dummy(msg) ? 1 : 0);
        for (int level = 1; level <= s.Mcount + 1; ++level) {
            auto refs = s.transmission_args(b, level);
            std::string cell = refs[0].str();
            if (refs.size() > 1) {
                cell += "|";
                for (size_t i = 1; i < refs.size(); ++i) {
                    if (i > 1) cell += ",";
                    cell += refs[i].str();
                }
            }
            os << "," << csv_quote(cell);
        }
        os << ",l_" << s.cfIndexOrigin[b];
        std::string ev;
        auto it = eventsByBlock.find(b);
        if (it != eventsByBlock.end()) {
            for (const auto* e : it->second) {
                if (!ev.empty()) ev += ";";
                ev += "k" + std::to_string(e->level) + ":[m" + std::to_string(e->firstMsg) +
                      "..m" + std::to_string(e->lastMsg) + "]";
            }
        }
        os << "," << csv_quote(ev) << "\n";
    }
    return os.str();
}

std::vector<CompressionAnnotation> annotate_compression_rates(const Evaluator& ev,
                                                              const std::vector<int>& cfRelays) {
    std::vector<CompressionAnnotation> out;
    MiCache cache(&ev.components());
    const auto& reg = ev.registry();
    for (int i : cfRelays)
        out.push_back({i, ev.mi(cache, reg.y(i), reg.yhat({i}), reg.x({i}))});
    return out;
}

void attach_compression_rates(Schedule& s, const Evaluator& ev,
                              const std::vector<int>& cfRelays) {
    s.compressionRates = annotate_compression_rates(ev, cfRelays);
}

}  // namespace relaynet
