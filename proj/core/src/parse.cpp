#include "ostro/parse.hpp"

#include <cctype>
#include <charconv>
#include <limits>

namespace ostro {

ParseError::ParseError(std::string message, std::size_t offset)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + message),
      detail_(std::move(message)), offset_(offset)
{
}

namespace {

constexpr int kMaxPrimes = 3;

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr run()
    {
        skip_ws();
        if (at_end()) throw ParseError("empty expression", pos_);
        Expr e = expr();
        skip_ws();
        if (!at_end()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }

    void skip_ws()
    {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    void expect(char c)
    {
        skip_ws();
        if (peek() != c) {
            if (at_end()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
            throw ParseError(std::string("expected '") + c + "' but found '" + peek() + "'", pos_);
        }
        ++pos_;
    }

    Expr expr()
    {
        std::vector<Expr> terms{term()};
        for (;;) {
            if (accept('+')) {
                terms.push_back(term());
            } else if (accept('-')) {
                terms.push_back(-term());
            } else {
                break;
            }
        }
        return terms.size() == 1 ? terms.front() : Expr::sum(std::move(terms));
    }

    Expr term()
    {
        std::vector<Expr> factors{factor()};
        for (;;) {
            if (accept('*')) {
                factors.push_back(factor());
            } else if (accept('/')) {
                factors.push_back(Expr::power(factor(), -1));
            } else {
                break;
            }
        }
        return factors.size() == 1 ? factors.front() : Expr::product(std::move(factors));
    }

    Expr factor()
    {
        Expr b = base();
        if (accept('^')) {
            skip_ws();
            const std::size_t at = pos_;
            const bool negative = accept('-');
            skip_ws();
            const long long n = integer("exponent");
            const long long signed_n = negative ? -n : n;
            if (signed_n > std::numeric_limits<int>::max() / 2 ||
                signed_n < -(std::numeric_limits<int>::max() / 2))
                throw ParseError("exponent out of range", at);
            return Expr::power(std::move(b), static_cast<int>(signed_n));
        }
        return b;
    }

    // Unsigned integer literal; rejects fractional parts so that orders and
    // exponents are reported precisely.
    long long integer(const char* what)
    {
        const std::size_t start = pos_;
        if (!is_digit(peek())) {
            if (at_end()) throw ParseError(std::string("expected integer ") + what + " but input ended", pos_);
            throw ParseError(std::string("expected integer ") + what, pos_);
        }
        long long value = 0;
        const auto* first = text_.data() + pos_;
        const auto* last = text_.data() + text_.size();
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{}) throw ParseError(std::string(what) + " out of range", start);
        pos_ += static_cast<std::size_t>(ptr - first);
        if (peek() == '.' || peek() == 'e' || peek() == 'E')
            throw ParseError(std::string(what) + " must be an integer", start);
        return value;
    }

    Expr base()
    {
        skip_ws();
        if (at_end()) throw ParseError("unexpected end of input", pos_);
        const char c = peek();
        if (c == '-') {
            ++pos_;
            return -base();
        }
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (is_digit(c) || (c == '.' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1])))
            return number();
        if (is_ident_start(c)) return identifier();
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    Expr number()
    {
        const std::size_t start = pos_;
        while (is_digit(peek())) ++pos_;
        if (peek() == '.') {
            ++pos_;
            while (is_digit(peek())) ++pos_;
        }
        if (peek() == 'e' || peek() == 'E') {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && is_digit(text_[p])) {
                pos_ = p;
                while (is_digit(peek())) ++pos_;
            }
        }
        double v = 0.0;
        const auto* first = text_.data() + start;
        const auto* last = text_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) throw ParseError("malformed number", start);
        return Expr::constant(v);
    }

    Expr identifier()
    {
        const std::size_t start = pos_;
        while (is_ident_char(peek())) ++pos_;
        const std::string_view id = text_.substr(start, pos_ - start);

        if (id == "x") {
            int primes = 0;
            while (peek() == '\'') {
                ++primes;
                ++pos_;
            }
            if (primes > kMaxPrimes)
                throw ParseError("at most 3 primes are allowed; use d(x,k)", start);
            return Expr::coord(primes);
        }
        if (id == "t") return Expr::time();
        if (id == "d") return derivative(start);
        if (id == "sin" || id == "cos" || id == "exp") {
            const Function f = id == "sin" ? Function::sin : (id == "cos" ? Function::cos : Function::exp);
            expect('(');
            Expr arg = expr();
            expect(')');
            return Expr::call(f, std::move(arg));
        }
        skip_ws();
        if (peek() == '(') throw ParseError("unknown function '" + std::string(id) + "'", start);
        return Expr::parameter(std::string(id));
    }

    Expr derivative(std::size_t start)
    {
        skip_ws();
        if (peek() != '(') throw ParseError("'d' is reserved; expected d(x,k)", start);
        ++pos_;
        skip_ws();
        const std::size_t var_at = pos_;
        if (peek() != 'x' || (pos_ + 1 < text_.size() && is_ident_char(text_[pos_ + 1])))
            throw ParseError("expected 'x' in d(x,k)", var_at);
        ++pos_;
        expect(',');
        skip_ws();
        const std::size_t order_at = pos_;
        if (peek() == '-') throw ParseError("derivative order must be >= 0", order_at);
        const long long k = integer("derivative order");
        if (k > 1'000'000) throw ParseError("derivative order out of range", order_at);
        expect(')');
        return Expr::coord(static_cast<int>(k));
    }
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

}  // namespace ostro
