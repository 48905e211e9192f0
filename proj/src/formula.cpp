#include "ummc/formula.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "ummc/errors.hpp"

namespace ummc {

bool StateFormula::is_propositional() const {
    struct Visitor {
        bool operator()(const TrueNode&) const { return true; }
        bool operator()(const AtomicNode&) const { return true; }
        bool operator()(const NotNode& n) const { return n.arg->is_propositional(); }
        bool operator()(const AndNode& n) const {
            return n.lhs->is_propositional() && n.rhs->is_propositional();
        }
        bool operator()(const ProbNode&) const { return false; }
    };
    return std::visit(Visitor{}, node_);
}

Horizon PathFormula::horizon() const {
    struct Visitor {
        Horizon operator()(const NextNode&) const { return 1; }
        Horizon operator()(const NextPathNode& n) const {
            Horizon h = n.arg->horizon();
            if (!h) return std::nullopt;
            return *h + 1;
        }
        Horizon operator()(const UntilNode& n) const { return n.bound; }
    };
    return std::visit(Visitor{}, node_);
}

namespace f {

StateFormulaPtr ftrue() {
    static const StateFormulaPtr t = std::make_shared<StateFormula>(TrueNode{});
    return t;
}

StateFormulaPtr ffalse() { return not_(ftrue()); }

StateFormulaPtr atom(std::string name) {
    return std::make_shared<StateFormula>(AtomicNode{std::move(name)});
}

StateFormulaPtr alpha(int k) { return atom("alpha=" + std::to_string(k)); }

StateFormulaPtr not_(StateFormulaPtr arg) {
    return std::make_shared<StateFormula>(NotNode{std::move(arg)});
}

StateFormulaPtr and_(StateFormulaPtr lhs, StateFormulaPtr rhs) {
    return std::make_shared<StateFormula>(AndNode{std::move(lhs), std::move(rhs)});
}

StateFormulaPtr or_(StateFormulaPtr lhs, StateFormulaPtr rhs) {
    return not_(and_(not_(std::move(lhs)), not_(std::move(rhs))));
}

StateFormulaPtr prob(CmpOp op, double bound, PathFormulaPtr path) {
    return std::make_shared<StateFormula>(ProbNode{op, bound, std::move(path)});
}

PathFormulaPtr next(StateFormulaPtr arg) {
    return std::make_shared<PathFormula>(NextNode{std::move(arg)});
}

PathFormulaPtr next(PathFormulaPtr arg) {
    return std::make_shared<PathFormula>(NextPathNode{std::move(arg)});
}

PathFormulaPtr until(StateFormulaPtr lhs, StateFormulaPtr rhs, Horizon bound) {
    return std::make_shared<PathFormula>(
        UntilNode{std::move(lhs), std::move(rhs), bound});
}

PathFormulaPtr eventually(StateFormulaPtr arg, Horizon bound) {
    return until(ftrue(), std::move(arg), bound);
}

}  // namespace f

namespace {

bool is_alpha_atom(const std::string& name) {
    return name.rfind("alpha=", 0) == 0;
}

}  // namespace

std::string to_string(const StateFormula& phi) {
    struct Visitor {
        std::string operator()(const TrueNode&) const { return "true"; }
        std::string operator()(const AtomicNode& n) const {
            if (is_alpha_atom(n.name)) return "(" + n.name + ")";
            return "\"" + n.name + "\"";
        }
        std::string operator()(const NotNode& n) const {
            return "(!" + to_string(*n.arg) + ")";
        }
        std::string operator()(const AndNode& n) const {
            return "(" + to_string(*n.lhs) + " & " + to_string(*n.rhs) + ")";
        }
        std::string operator()(const ProbNode& n) const {
            std::ostringstream out;
            out << "P" << to_string(n.op) << n.bound << " [ "
                << to_string(*n.path) << " ]";
            return out.str();
        }
    };
    return std::visit(Visitor{}, phi.node());
}

std::string to_string(const PathFormula& psi) {
    struct Visitor {
        std::string operator()(const NextNode& n) const {
            return "X " + to_string(*n.arg);
        }
        std::string operator()(const NextPathNode& n) const {
            return "X (" + to_string(*n.arg) + ")";
        }
        std::string operator()(const UntilNode& n) const {
            std::string bound =
                n.bound ? "<=" + std::to_string(*n.bound) : std::string();
            return to_string(*n.lhs) + " U" + bound + " " + to_string(*n.rhs);
        }
    };
    return std::visit(Visitor{}, psi.node());
}

std::string to_string(FilterOp op) {
    switch (op) {
        case FilterOp::Min: return "min";
        case FilterOp::Max: return "max";
        case FilterOp::Avg: return "avg";
    }
    return "?";
}

std::string to_string(CmpOp op) {
    switch (op) {
        case CmpOp::Le: return "<=";
        case CmpOp::Lt: return "<";
        case CmpOp::Ge: return ">=";
        case CmpOp::Gt: return ">";
    }
    return "?";
}

std::string to_string(const Query& q) {
    std::ostringstream out;
    std::string inner;
    if (q.bound)
        inner = "P" + to_string(q.bound->first) + std::to_string(q.bound->second) +
                " [ " + to_string(*q.path) + " ]";
    else
        inner = "P=? [ " + to_string(*q.path) + " ]";
    if (q.filter_op)
        out << "filter(" << to_string(*q.filter_op) << ", " << inner << ", "
            << to_string(*q.filter_states) << ")";
    else
        out << inner;
    return out.str();
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

enum class Tok {
    End, LParen, RParen, LBracket, RBracket, Not, And, Or, Comma,
    Le, Lt, Ge, Gt, Eq, Quest,  // Quest is "=?"
    Number, Ident, Quoted,
};

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }
    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        current_.pos = pos_;
        if (pos_ >= text_.size()) {
            current_ = {Tok::End, "", 0.0, pos_};
            return;
        }
        char c = text_[pos_];
        switch (c) {
            case '(': current_ = {Tok::LParen, "(", 0.0, pos_++}; return;
            case ')': current_ = {Tok::RParen, ")", 0.0, pos_++}; return;
            case '[': current_ = {Tok::LBracket, "[", 0.0, pos_++}; return;
            case ']': current_ = {Tok::RBracket, "]", 0.0, pos_++}; return;
            case '!': current_ = {Tok::Not, "!", 0.0, pos_++}; return;
            case '&': current_ = {Tok::And, "&", 0.0, pos_++}; return;
            case '|': current_ = {Tok::Or, "|", 0.0, pos_++}; return;
            case ',': current_ = {Tok::Comma, ",", 0.0, pos_++}; return;
            default: break;
        }
        if (c == '<' || c == '>') {
            bool eq = pos_ + 1 < text_.size() && text_[pos_ + 1] == '=';
            Tok kind = c == '<' ? (eq ? Tok::Le : Tok::Lt)
                                : (eq ? Tok::Ge : Tok::Gt);
            current_ = {kind, eq ? std::string(1, c) + "=" : std::string(1, c),
                        0.0, pos_};
            pos_ += eq ? 2 : 1;
            return;
        }
        if (c == '=') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '?') {
                current_ = {Tok::Quest, "=?", 0.0, pos_};
                pos_ += 2;
            } else {
                current_ = {Tok::Eq, "=", 0.0, pos_++};
            }
            return;
        }
        if (c == '"') {
            std::size_t end = text_.find('"', pos_ + 1);
            if (end == std::string::npos)
                throw ParseError("unterminated quoted proposition", pos_);
            current_ = {Tok::Quoted, text_.substr(pos_ + 1, end - pos_ - 1), 0.0,
                        pos_};
            pos_ = end + 1;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                    text_[pos_] == '.' || text_[pos_] == 'e' ||
                    text_[pos_] == 'E' ||
                    ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
                     (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
                ++pos_;
            std::string num = text_.substr(start, pos_ - start);
            char* end = nullptr;
            double value = std::strtod(num.c_str(), &end);
            if (end == nullptr || *end != '\0')
                throw ParseError("malformed number '" + num + "'", start);
            current_ = {Tok::Number, num, value, start};
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                    text_[pos_] == '_'))
                ++pos_;
            current_ = {Tok::Ident, text_.substr(start, pos_ - start), 0.0, start};
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    Token current_;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    Query parse_query() {
        Query q;
        if (peek_ident("filter")) {
            lex_.take();
            expect(Tok::LParen, "'('");
            q.filter_op = parse_filter_op();
            expect(Tok::Comma, "','");
            parse_prob_query(q);
            if (lex_.peek().kind == Tok::Comma) {
                lex_.take();
                q.filter_states = parse_state();
            } else {
                q.filter_states = f::ftrue();
            }
            expect(Tok::RParen, "')'");
        } else {
            parse_prob_query(q);
        }
        expect(Tok::End, "end of input");
        return q;
    }

    StateFormulaPtr parse_state_only() {
        StateFormulaPtr phi = parse_state();
        expect(Tok::End, "end of input");
        return phi;
    }

private:
    bool peek_ident(const char* word) const {
        return lex_.peek().kind == Tok::Ident && lex_.peek().text == word;
    }

    Token expect(Tok kind, const char* what) {
        if (lex_.peek().kind != kind)
            throw ParseError(std::string("expected ") + what + " but found '" +
                                 lex_.peek().text + "'",
                             lex_.peek().pos);
        return lex_.take();
    }

    FilterOp parse_filter_op() {
        Token t = expect(Tok::Ident, "filter operator");
        if (t.text == "min") return FilterOp::Min;
        if (t.text == "max") return FilterOp::Max;
        if (t.text == "avg") return FilterOp::Avg;
        throw ParseError("unknown filter operator '" + t.text + "'", t.pos);
    }

    void parse_prob_query(Query& q) {
        Token p = expect(Tok::Ident, "'P'");
        if (p.text != "P")
            throw ParseError("expected 'P' but found '" + p.text + "'", p.pos);
        if (lex_.peek().kind == Tok::Quest) {
            lex_.take();
        } else {
            CmpOp op = parse_cmp();
            Token n = expect(Tok::Number, "probability bound");
            if (n.number < 0.0 || n.number > 1.0)
                throw ParseError("probability bound outside [0,1]", n.pos);
            q.bound = {op, n.number};
        }
        expect(Tok::LBracket, "'['");
        q.path = parse_path();
        expect(Tok::RBracket, "']'");
    }

    CmpOp parse_cmp() {
        switch (lex_.peek().kind) {
            case Tok::Le: lex_.take(); return CmpOp::Le;
            case Tok::Lt: lex_.take(); return CmpOp::Lt;
            case Tok::Ge: lex_.take(); return CmpOp::Ge;
            case Tok::Gt: lex_.take(); return CmpOp::Gt;
            default:
                throw ParseError("expected comparison operator", lex_.peek().pos);
        }
    }

    Horizon parse_optional_bound() {
        if (lex_.peek().kind != Tok::Le) return std::nullopt;
        lex_.take();
        Token n = expect(Tok::Number, "step bound");
        long long steps = static_cast<long long>(n.number);
        if (static_cast<double>(steps) != n.number || steps < 0)
            throw ParseError("step bound must be a non-negative integer", n.pos);
        return steps;
    }

    PathFormulaPtr parse_path() {
        if (peek_ident("X")) {
            lex_.take();
            return parse_next_argument();
        }
        if (peek_ident("F")) {
            lex_.take();
            Horizon bound = parse_optional_bound();
            return f::eventually(parse_state(), bound);
        }
        StateFormulaPtr lhs = parse_state();
        Token u = expect(Tok::Ident, "'U'");
        if (u.text != "U")
            throw ParseError("expected 'U' but found '" + u.text + "'", u.pos);
        Horizon bound = parse_optional_bound();
        StateFormulaPtr rhs = parse_state();
        return f::until(std::move(lhs), std::move(rhs), bound);
    }

    // After 'X': either a state formula or a parenthesized path formula.
    PathFormulaPtr parse_next_argument() {
        if (lex_.peek().kind == Tok::LParen) {
            lex_.take();
            if (peek_ident("X") || peek_ident("F")) {
                PathFormulaPtr inner = parse_path();
                expect(Tok::RParen, "')'");
                return f::next(std::move(inner));
            }
            StateFormulaPtr phi = parse_state();
            if (lex_.peek().kind == Tok::Ident && lex_.peek().text == "U") {
                lex_.take();
                Horizon bound = parse_optional_bound();
                StateFormulaPtr rhs = parse_state();
                expect(Tok::RParen, "')'");
                return f::next(f::until(std::move(phi), std::move(rhs), bound));
            }
            expect(Tok::RParen, "')'");
            return f::next(finish_state_after_group(std::move(phi)));
        }
        return f::next(parse_state_unary());
    }

    // A parenthesized state formula may continue with & or | outside the
    // parens when used as the argument of X, e.g. X (("a") & "b") has the
    // parens around "a" only.
    StateFormulaPtr finish_state_after_group(StateFormulaPtr phi) {
        while (true) {
            if (lex_.peek().kind == Tok::And) {
                lex_.take();
                phi = f::and_(std::move(phi), parse_state_unary());
            } else if (lex_.peek().kind == Tok::Or) {
                lex_.take();
                phi = f::or_(std::move(phi), parse_state_unary());
            } else {
                return phi;
            }
        }
    }

    StateFormulaPtr parse_state() { return parse_or(); }

    StateFormulaPtr parse_or() {
        StateFormulaPtr lhs = parse_and();
        while (lex_.peek().kind == Tok::Or) {
            lex_.take();
            lhs = f::or_(std::move(lhs), parse_and());
        }
        return lhs;
    }

    StateFormulaPtr parse_and() {
        StateFormulaPtr lhs = parse_state_unary();
        while (lex_.peek().kind == Tok::And) {
            lex_.take();
            lhs = f::and_(std::move(lhs), parse_state_unary());
        }
        return lhs;
    }

    StateFormulaPtr parse_state_unary() {
        const Token& t = lex_.peek();
        switch (t.kind) {
            case Tok::Not:
                lex_.take();
                return f::not_(parse_state_unary());
            case Tok::LParen: {
                lex_.take();
                StateFormulaPtr phi = parse_state();
                expect(Tok::RParen, "')'");
                return phi;
            }
            case Tok::Quoted: {
                Token q = lex_.take();
                return f::atom(q.text);
            }
            case Tok::Ident: {
                if (t.text == "true") {
                    lex_.take();
                    return f::ftrue();
                }
                if (t.text == "false") {
                    lex_.take();
                    return f::ffalse();
                }
                if (t.text == "alpha") {
                    Token a = lex_.take();
                    expect(Tok::Eq, "'=' after alpha");
                    Token n = expect(Tok::Number, "pattern index");
                    long long k = static_cast<long long>(n.number);
                    if (static_cast<double>(k) != n.number || k < 1)
                        throw ParseError("pattern index must be a positive integer",
                                         n.pos);
                    return f::alpha(static_cast<int>(k));
                }
                if (t.text == "P") {
                    lex_.take();
                    if (lex_.peek().kind == Tok::Quest)
                        throw ParseError(
                            "quantitative P=? is only allowed at the top level",
                            lex_.peek().pos);
                    CmpOp op = parse_cmp();
                    Token n = expect(Tok::Number, "probability bound");
                    if (n.number < 0.0 || n.number > 1.0)
                        throw ParseError("probability bound outside [0,1]", n.pos);
                    expect(Tok::LBracket, "'['");
                    PathFormulaPtr path = parse_path();
                    expect(Tok::RBracket, "']'");
                    return f::prob(op, n.number, std::move(path));
                }
                throw ParseError("unexpected identifier '" + t.text +
                                     "' (propositions are quoted)",
                                 t.pos);
            }
            default:
                throw ParseError("expected a state formula but found '" + t.text +
                                     "'",
                                 t.pos);
        }
    }

    Lexer lex_;
};

}  // namespace

Query parse_query(const std::string& text) {
    Parser parser(text);
    return parser.parse_query();
}

StateFormulaPtr parse_state_formula(const std::string& text) {
    Parser parser(text);
    return parser.parse_state_only();
}

}  // namespace ummc
