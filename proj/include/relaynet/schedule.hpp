#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relaynet/common.hpp"
#include "relaynet/info.hpp"

namespace relaynet {

// BlockByBlock decodes one block per backward step and needs the trailing
// dummy width L; BlocksUnited decodes B blocks at once per message and
// repeats each message across its B-block group.
enum class ScheduleVariant { BlockByBlock, BlocksUnited };

std::string variant_token(ScheduleVariant v);                     // "thm1" / "thm2"
std::optional<ScheduleVariant> parse_variant(const std::string&);

struct MsgRef {
    long id = 0;       // message index; <= 0 means before the timetable starts
    bool dummy = true;
    std::string str() const { return dummy ? "1" : "m" + std::to_string(id); }
};

struct DecodeEvent {
    int level = 0;      // k in 2..M+2 (M+2 is the destination)
    long block = 0;     // decoding happens at the end of this block
    long firstMsg = 0;  // claimed decoded message ids [firstMsg..lastMsg]
    long lastMsg = 0;
};

// Per-relay compression rate I(Y_i; Yhat_i | X_i), attached to a schedule
// once a concrete channel model is available (the +epsilon codebook slack
// is symbolic and not represented).
struct CompressionAnnotation {
    int nodeId = 0;
    double rateBits = 0.0;
};

struct Schedule {
    ScheduleVariant variant = ScheduleVariant::BlockByBlock;
    int Mcount = 1;
    long B = 2;
    long L = 1;               // trailing dummy width; 0 for BlocksUnited
    long totalBlocks = 0;     // B^(M+1)
    long totalMessages = 0;   // B^(M+1) blockwise, B^M united
    std::vector<uint8_t> dummyFlag;      // index 1..totalMessages
    std::vector<DecodeEvent> decodeEvents;  // ascending (block, level)
    // cfIndexOrigin[b]: the block whose compression index every C-F relay
    // transmits during block b (0 denotes the initial index l_{i,0} = 1).
    std::vector<long> cfIndexOrigin;     // index 1..totalBlocks
    std::vector<CompressionAnnotation> compressionRates;  // empty until attached

    bool msg_dummy(long id) const {
        return id <= 0 || dummyFlag[static_cast<size_t>(id)] != 0;
    }
    MsgRef ref(long id) const { return {id, msg_dummy(id)}; }
    // Message index the source encodes in block b: b itself blockwise,
    // ceil(b/B) united.
    long message_of_block(long b) const;
    // Argument ids of x_{pi(level),b}; args[0] is the fresh message, the
    // rest condition the codebook. level ranges over 1..Mcount+1.
    std::vector<long> transmission_arg_ids(long b, int level) const;
    std::vector<MsgRef> transmission_args(long b, int level) const;

    long non_dummy_count() const;
};

inline constexpr long kDefaultBlockCap = 1000000;  // bound on B^(M+1)

// Blockwise backward-decoding timetable. Requires B >= 2, 1 <= L < B,
// Mcount >= 1, B^(Mcount+1) <= cap.
Schedule build_schedule_thm1(int Mcount, long B, long L, long cap = kDefaultBlockCap);

// United-decoding timetable with repeated intra-group messages.
// Requires B >= 2, Mcount >= 1, B^(Mcount+1) <= cap.
Schedule build_schedule_thm2(int Mcount, long B, long cap = kDefaultBlockCap);

struct CausalityViolation {
    int level = 0;
    long block = 0;
    std::string detail;
};

struct CausalityReport {
    std::optional<CausalityViolation> violation;  // first one found
    bool ok() const { return !violation.has_value(); }
    std::string summary() const;
};

// Replays every decode event in backward per-event order and checks that
// each message required by the typicality tests is dummy, decoded earlier
// in the same event, or decoded at an earlier event of the same node; that
// every transmitted message argument was decoded before the block that
// carries it; and that compression indices are generated before use.
CausalityReport verify_schedule(const Schedule& s);

// Non-dummy messages over total message slots, as an exact rational.
Rational effective_rate_fraction(const Schedule& s);

// (B-L)/B * ((B-1)/B)^M blockwise, ((B-1)/B)^M united.
Rational closed_form_rate_fraction(const Schedule& s);

// Timeline with one row per block: transmissions, compression-index
// origin, dummy flag, and decode events. RFC-4180 quoting.
std::string schedule_to_csv(const Schedule& s);

std::vector<CompressionAnnotation> annotate_compression_rates(const Evaluator& ev,
                                                              const std::vector<int>& cfRelays);

// Computes and stores the annotations on the schedule.
void attach_compression_rates(Schedule& s, const Evaluator& ev,
                              const std::vector<int>& cfRelays);

}  // namespace relaynet
