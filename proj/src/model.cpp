#include "ummc/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "ummc/errors.hpp"
#include "ummc/numeric.hpp"

namespace ummc {

namespace {
const std::set<std::string> kEmptyLabelSet;
}

StateSpace::StateSpace(int n_states, std::map<State, std::set<std::string>> labels,
                       bool has_dummy_init, std::set<std::string> extra_propositions)
    : n_(n_states), has_dummy_init_(has_dummy_init),
      universe_(std::move(extra_propositions)) {
    if (n_states < 1) throw Error("state space needs at least one action state");
    labels_.resize(static_cast<std::size_t>(n_) + 1);
    for (auto& [s, props] : labels) {
        if (s < first_state() || s > n_)
            throw Error("label map mentions invalid state " + std::to_string(s));
        labels_[static_cast<std::size_t>(s)] = std::move(props);
    }
    if (has_dummy_init_) labels_[0].insert("init");
    for (const auto& props : labels_)
        universe_.insert(props.begin(), props.end());
}

StateSpace StateSpace::with_state_names(const std::vector<std::string>& names,
                                        bool has_dummy_init) {
    std::map<State, std::set<std::string>> labels;
    for (std::size_t i = 0; i < names.size(); ++i)
        labels[static_cast<State>(i) + 1] = {names[i]};
    return StateSpace(static_cast<int>(names.size()), std::move(labels),
                      has_dummy_init);
}

const std::set<std::string>& StateSpace::labels_of(State s) const {
    if (!is_valid_state(s))
        throw Error("labels_of: invalid state " + std::to_string(s));
    return labels_[static_cast<std::size_t>(s)];
}

bool StateSpace::state_has_label(State s, const std::string& prop) const {
    return labels_of(s).count(prop) != 0;
}

std::vector<State> StateSpace::states_with_label(const std::string& prop) const {
    std::vector<State> out;
    for (State s = first_state(); s <= n_; ++s)
        if (labels_[static_cast<std::size_t>(s)].count(prop)) out.push_back(s);
    return out;
}

bool StateSpace::operator==(const StateSpace& other) const {
    return n_ == other.n_ && has_dummy_init_ == other.has_dummy_init_ &&
           labels_ == other.labels_;
}

Dtmc::Dtmc(StateSpace space, std::vector<double> init,
           std::vector<std::vector<double>> trans, bool restricted)
    : space_(std::move(space)),
      init_(std::move(init)),
      trans_(std::move(trans)),
      restricted_(restricted) {
    const auto rows = static_cast<std::size_t>(space_.index_size());
    if (init_.size() != rows)
        throw Error("init vector has wrong length");
    if (trans_.size() != rows)
        throw Error("transition matrix has wrong row count");
    for (const auto& row : trans_)
        if (row.size() != rows) throw Error("transition matrix row has wrong length");
}

bool Dtmc::operator==(const Dtmc& other) const {
    return space_ == other.space_ && init_ == other.init_ &&
           trans_ == other.trans_ && restricted_ == other.restricted_;
}

std::vector<DtmcViolation> validate_dtmc(const Dtmc& d) {
    std::vector<DtmcViolation> out;
    const StateSpace& sp = d.space();

    auto check_entry = [&out](State row, State col, double p) {
        double dev = p < 0.0 ? -p : (p > 1.0 ? p - 1.0 : 0.0);
        if (dev > kProbTolerance || !std::isfinite(p)) {
            std::ostringstream msg;
            msg << "entry (" << row << "," << col << ") = " << p
                << " outside [0,1]";
            out.push_back({DtmcViolation::Kind::EntryRange, row, col,
                           std::isfinite(p) ? dev : 1.0, msg.str()});
        }
    };

    KahanSum init_sum;
    for (State s = sp.first_state(); s <= sp.last_state(); ++s) {
        check_entry(-1, s, d.init()[static_cast<std::size_t>(s)]);
        init_sum.add(d.init()[static_cast<std::size_t>(s)]);
    }
    double init_dev = d.restricted() ? std::max(0.0, init_sum.value() - 1.0)
                                     : std::fabs(init_sum.value() - 1.0);
    if (init_dev > kProbTolerance) {
        std::ostringstream msg;
        msg << "initial distribution sums to " << init_sum.value();
        out.push_back({DtmcViolation::Kind::InitSum, -1, -1, init_dev, msg.str()});
    }

    for (State s = sp.first_state(); s <= sp.last_state(); ++s) {
        KahanSum row_sum;
        for (State t = sp.first_state(); t <= sp.last_state(); ++t) {
            double p = d.trans(s, t);
            check_entry(s, t, p);
            row_sum.add(p);
        }
        double sum = row_sum.value();
        bool bad = d.restricted() ? sum > 1.0 + kProbTolerance
                                  : std::fabs(sum - 1.0) > kProbTolerance;
        if (bad) {
            std::ostringstream msg;
            msg << "row " << s << " sums to " << sum
                << (d.restricted() ? " (> 1 on restricted model)" : "");
            out.push_back({DtmcViolation::Kind::RowSum, s, -1,
                           std::fabs(sum - 1.0), msg.str()});
        }
    }
    return out;
}

PatternMixture::PatternMixture(StateSpace space,
                               std::vector<std::vector<std::vector<double>>> patterns,
                               std::vector<double> iota_init)
    : space_(std::move(space)),
      patterns_(std::move(patterns)),
      iota_init_(std::move(iota_init)) {
    if (patterns_.empty()) throw Error("mixture needs at least one pattern");
    if (space_.has_dummy_init())
        throw Error("pattern mixtures are defined over action states only");
    const auto rows = static_cast<std::size_t>(space_.index_size());
    if (iota_init_.size() != rows) throw Error("iota_init has wrong length");
    for (const auto& mat : patterns_) {
        if (mat.size() != rows) throw Error("pattern matrix has wrong row count");
        for (const auto& row : mat)
            if (row.size() != rows) throw Error("pattern matrix row has wrong length");
    }
    // Stochasticity is a construction-time contract for mixtures.
    for (int k = 1; k <= K(); ++k) {
        auto report = validate_dtmc(pattern_dtmc(k));
        if (!report.empty())
            throw Error("pattern " + std::to_string(k) +
                        " is not a valid DTMC: " + report.front().message);
    }
}

Dtmc PatternMixture::pattern_dtmc(int k) const {
    if (k < 1 || k > K())
        throw Error("pattern index " + std::to_string(k) + " out of range");
    return Dtmc(space_, iota_init_, patterns_[static_cast<std::size_t>(k) - 1]);
}

bool PatternMixture::operator==(const PatternMixture& other) const {
    return space_ == other.space_ && patterns_ == other.patterns_ &&
           iota_init_ == other.iota_init_;
}

void validate_strategy(const std::vector<double>& theta) {
    if (theta.empty()) throw Error("strategy vector is empty");
    KahanSum sum;
    for (double p : theta) {
        if (!(p >= 0.0 && p <= 1.0))
            throw Error("strategy entry outside [0,1]");
        sum.add(p);
    }
    if (std::fabs(sum.value() - 1.0) > kProbTolerance)
        throw Error("strategy does not sum to 1");
}

void validate_trace(const StateSpace& space, const Trace& trace) {
    if (trace.events.empty())
        throw Error("trace for user '" + trace.user_id + "' is empty");
    for (State s : trace.events)
        if (s < 1 || s > space.n_states())
            throw Error("trace for user '" + trace.user_id +
                        "' mentions invalid state " + std::to_string(s));
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

}  // namespace

std::vector<Trace> ingest_traces(std::istream& source,
                                 const std::map<std::string, State>& mapping,
                                 const IngestOptions& options) {
    if (options.format != LogFormat::Tsv)
        throw Error("unsupported log format");

    std::vector<Trace> traces;
    std::map<std::string, std::size_t> user_slot;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        auto fields = split_tabs(line);
        if (fields.size() != 2 && fields.size() != 3)
            throw ParseError("line " + std::to_string(line_no) +
                                 ": expected 2 or 3 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        const std::string& user = fields[0];
        const std::string& event = fields[1];
        if (user.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty user id",
                             line_no);
        if (event.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty event name",
                             line_no);

        auto it = mapping.find(event);
        if (it == mapping.end()) {
            if (options.unmapped == UnmappedPolicy::Skip) continue;
            throw ParseError("line " + std::to_string(line_no) +
                                 ": unmapped event '" + event + "'",
                             line_no);
        }

        auto slot = user_slot.find(user);
        if (slot == user_slot.end()) {
            slot = user_slot.emplace(user, traces.size()).first;
            traces.push_back(Trace{user, {}});
        }
        traces[slot->second].events.push_back(it->second);
    }
    return traces;
}

}  // namespace ummc
