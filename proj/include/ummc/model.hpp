/*
 * Core model types: state spaces with atomic-proposition labelling,
 * DTMCs, activity-pattern mixtures, per-user strategies, and event
 * traces, plus validation and trace ingestion.
 */
#ifndef UMMC_MODEL_HPP
#define UMMC_MODEL_HPP

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace ummc {

using State = int;

// A set of states 1..n (plus an optional dummy initial state 0, always
// labelled "init") together with an immutable labelling of states by
// atomic propositions. The proposition universe is derived from the
// label map, so every known proposition labels at least one state.
class StateSpace {
public:
    StateSpace() = default;
    // The proposition universe is derived from the label map;
    // `extra_propositions` adds names that label no state (used when
    // restriction drops every carrier of a proposition).
    StateSpace(int n_states, std::map<State, std::set<std::string>> labels,
               bool has_dummy_init,
               std::set<std::string> extra_propositions = {});

    // Convenience: one state per name, each labelled with its own name.
    static StateSpace with_state_names(const std::vector<std::string>& names,
                                       bool has_dummy_init);

    int n_states() const { return n_; }
    bool has_dummy_init() const { return has_dummy_init_; }
    State first_state() const { return has_dummy_init_ ? 0 : 1; }
    State last_state() const { return n_; }
    // Number of entries in state-indexed vectors (index 0 is unused when
    // there is no dummy state).
    int index_size() const { return n_ + 1; }
    bool is_valid_state(State s) const {
        return s >= first_state() && s <= n_;
    }

    // Total over valid states: unlabelled states yield the empty set.
    const std::set<std::string>& labels_of(State s) const;
    bool state_has_label(State s, const std::string& prop) const;
    bool has_proposition(const std::string& prop) const {
        return universe_.count(prop) != 0;
    }
    const std::set<std::string>& propositions() const { return universe_; }
    std::vector<State> states_with_label(const std::string& prop) const;

    bool operator==(const StateSpace& other) const;

private:
    int n_ = 0;
    bool has_dummy_init_ = false;
    std::vector<std::set<std::string>> labels_;  // indexed by state
    std::set<std::string> universe_;
};

// Row-stochastic transition system over a StateSpace. Vectors and the
// matrix are indexed by state id; index 0 is meaningful only when the
// space has a dummy initial state. A Dtmc produced by state restriction
// is flagged `restricted` and its rows may be substochastic.
class Dtmc {
public:
    Dtmc() = default;
    Dtmc(StateSpace space, std::vector<double> init,
         std::vector<std::vector<double>> trans, bool restricted = false);

    const StateSpace& space() const { return space_; }
    const std::vector<double>& init() const { return init_; }
    const std::vector<std::vector<double>>& trans() const { return trans_; }
    double trans(State from, State to) const { return trans_[from][to]; }
    bool restricted() const { return restricted_; }

    bool operator==(const Dtmc& other) const;

private:
    StateSpace space_;
    std::vector<double> init_;
    std::vector<std::vector<double>> trans_;
    bool restricted_ = false;
};

struct DtmcViolation {
    enum class Kind { RowSum, InitSum, EntryRange };
    Kind kind;
    State row;        // -1 for init-vector violations
    State col;        // -1 unless EntryRange
    double deviation; // |sum - 1| for sums, distance outside [0,1] for entries
    std::string message;
};

// Reports structural violations; never mutates and never throws.
std::vector<DtmcViolation> validate_dtmc(const Dtmc& d);

// K activity patterns sharing one state space and one initial
// distribution; only the transition matrices differ.
class PatternMixture {
public:
    PatternMixture() = default;
    PatternMixture(StateSpace space,
                   std::vector<std::vector<std::vector<double>>> patterns,
                   std::vector<double> iota_init);

    const StateSpace& space() const { return space_; }
    int K() const { return static_cast<int>(patterns_.size()); }
    const std::vector<std::vector<std::vector<double>>>& patterns() const {
        return patterns_;
    }
    const std::vector<std::vector<double>>& pattern(int k) const {
        return patterns_[static_cast<std::size_t>(k) - 1];
    }
    const std::vector<double>& iota_init() const { return iota_init_; }

    // The pattern k viewed as a standalone Dtmc with the shared init.
    Dtmc pattern_dtmc(int k) const;

    bool operator==(const PatternMixture& other) const;

private:
    StateSpace space_;
    std::vector<std::vector<std::vector<double>>> patterns_;  // [k][from][to]
    std::vector<double> iota_init_;
};

struct UserStrategy {
    std::string user_id;
    std::vector<double> theta;

    bool operator==(const UserStrategy& other) const {
        return user_id == other.user_id && theta == other.theta;
    }
};

// Throws if theta is not a probability vector (1e-12 tolerance).
void validate_strategy(const std::vector<double>& theta);

struct Trace {
    std::string user_id;
    std::vector<State> events;
};

// Throws if the trace is empty or mentions an invalid action state.
void validate_trace(const StateSpace& space, const Trace& trace);

enum class LogFormat { Tsv };

enum class UnmappedPolicy { Strict, Skip };

struct IngestOptions {
    LogFormat format = LogFormat::Tsv;
    UnmappedPolicy unmapped = UnmappedPolicy::Strict;
};

// Reads a line-oriented event log (`user_id<TAB>event_name[<TAB>timestamp]`,
// '#' comment lines and blank lines skipped) and partitions events into one
// trace per user, preserving per-user input order. Users appear in order of
// first occurrence.
std::vector<Trace> ingest_traces(std::istream& source,
                                 const std::map<std::string, State>& mapping,
                                 const IngestOptions& options = {});

}  // namespace ummc

#endif
