#include "mfhawkes/expression.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mfh
{
struct Expression::Node
{
    enum class Kind
    {
        constant,
        variable,
        negate,
        add,
        sub,
        mul,
        div,
        pow,
        call1,
        call2
    };
    Kind kind = Kind::constant;
    double value = 0;
    double (*fn1)(double) = nullptr;
    double (*fn2)(double, double) = nullptr;
    std::vector<std::shared_ptr<Node const>> args;

    double eval(double x) const
    {
        switch (kind)
        {
            case Kind::constant: return value;
            case Kind::variable: return x;
            case Kind::negate: return -args[0]->eval(x);
            case Kind::add: return args[0]->eval(x) + args[1]->eval(x);
            case Kind::sub: return args[0]->eval(x) - args[1]->eval(x);
            case Kind::mul: return args[0]->eval(x) * args[1]->eval(x);
            case Kind::div: return args[0]->eval(x) / args[1]->eval(x);
            case Kind::pow:
                return std::pow(args[0]->eval(x), args[1]->eval(x));
            case Kind::call1: return fn1(args[0]->eval(x));
            case Kind::call2: return fn2(args[0]->eval(x), args[1]->eval(x));
        }
        return 0;
    }
};

namespace
{
using NodePtr = std::shared_ptr<Expression::Node const>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, std::vector<NodePtr> args = {})
{
    auto n = std::make_shared<Expression::Node>();
    n->kind = kind;
    n->args = std::move(args);
    return n;
}

double fmin2(double a, double b) { return std::fmin(a, b); }
double fmax2(double a, double b) { return std::fmax(a, b); }
double fpow2(double a, double b) { return std::pow(a, b); }

class Parser
{
  public:
    Parser(std::string_view text,
           std::string const& variable,
           std::map<std::string, double> const& constants)
        : text_(text), variable_(variable), constants_(constants)
    {
    }

    NodePtr parse()
    {
        auto result = parse_sum();
        skip_space();
        if (pos_ != text_.size())
            fail("unexpected trailing input");
        return result;
    }

  private:
    std::string_view text_;
    std::string const& variable_;
    std::map<std::string, double> const& constants_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(std::string const& what) const
    {
        throw std::invalid_argument("expression '" + std::string(text_)
                                    + "': " + what + " at offset "
                                    + std::to_string(pos_));
    }

    void skip_space()
    {
        while (pos_ < text_.size()
               && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c)
        {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c))
            fail(std::string("expected '") + c + "'");
    }

    NodePtr parse_sum()
    {
        auto lhs = parse_product();
        for (;;)
        {
            if (accept('+'))
                lhs = make(Kind::add, {lhs, parse_product()});
            else if (accept('-'))
                lhs = make(Kind::sub, {lhs, parse_product()});
            else
                return lhs;
        }
    }

    NodePtr parse_product()
    {
        auto lhs = parse_unary();
        for (;;)
        {
            if (accept('*'))
                lhs = make(Kind::mul, {lhs, parse_unary()});
            else if (accept('/'))
                lhs = make(Kind::div, {lhs, parse_unary()});
            else
                return lhs;
        }
    }

    NodePtr parse_unary()
    {
        if (accept('-'))
            return make(Kind::negate, {parse_unary()});
        if (accept('+'))
            return parse_unary();
        return parse_power();
    }

    NodePtr parse_power()
    {
        auto base = parse_primary();
        if (accept('^'))
            return make(Kind::pow, {base, parse_unary()});
        return base;
    }

    NodePtr parse_primary()
    {
        skip_space();
        if (pos_ >= text_.size())
            fail("unexpected end of input");
        char const c = text_[pos_];
        if (accept('('))
        {
            auto inner = parse_sum();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number()
    {
        char const* begin = text_.data() + pos_;
        char* end = nullptr;
        std::string buffer(begin, text_.size() - pos_);
        double const v = std::strtod(buffer.c_str(), &end);
        std::size_t const used = static_cast<std::size_t>(end - buffer.c_str());
        if (used == 0)
            fail("malformed number");
        pos_ += used;
        auto n = std::make_shared<Expression::Node>();
        n->value = v;
        return n;
    }

    NodePtr parse_identifier()
    {
        std::size_t const start = pos_;
        while (pos_ < text_.size()
               && (std::isalnum(static_cast<unsigned char>(text_[pos_]))
                   || text_[pos_] == '_'))
            ++pos_;
        std::string const name(text_.substr(start, pos_ - start));

        if (accept('('))
            return parse_call(name);
        if (name == variable_)
            return make(Kind::variable);
        if (auto it = constants_.find(name); it != constants_.end())
        {
            auto n = std::make_shared<Expression::Node>();
            n->value = it->second;
            return n;
        }
        if (name == "pi")
        {
            auto n = std::make_shared<Expression::Node>();
            n->value = 3.14159265358979323846;
            return n;
        }
        fail("unknown identifier '" + name + "'");
    }

    NodePtr parse_call(std::string const& name)
    {
        static std::map<std::string, double (*)(double)> const unary{
            {"exp", [](double v) { return std::exp(v); }},
            {"log", [](double v) { return std::log(v); }},
            {"sqrt", [](double v) { return std::sqrt(v); }},
            {"abs", [](double v) { return std::fabs(v); }},
            {"sin", [](double v) { return std::sin(v); }},
            {"cos", [](double v) { return std::cos(v); }},
            {"tan", [](double v) { return std::tan(v); }},
            {"tanh", [](double v) { return std::tanh(v); }},
            {"sinh", [](double v) { return std::sinh(v); }},
            {"cosh", [](double v) { return std::cosh(v); }},
        };
        static std::map<std::string, double (*)(double, double)> const binary{
            {"min", &fmin2}, {"max", &fmax2}, {"pow", &fpow2}};

        auto first = parse_sum();
        if (auto it = unary.find(name); it != unary.end())
        {
            expect(')');
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::call1;
            n->fn1 = it->second;
            n->args = {first};
            return n;
        }
        if (auto it = binary.find(name); it != binary.end())
        {
            expect(',');
            auto second = parse_sum();
            expect(')');
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::call2;
            n->fn2 = it->second;
            n->args = {first, second};
            return n;
        }
        fail("unknown function '" + name + "'");
    }
};
}  // namespace

Expression::Expression(std::string_view text,
                       std::string variable,
                       std::map<std::string, double> constants)
    : text_(text)
{
    root_ = Parser(text, variable, constants).parse();
}

double Expression::operator()(double value) const
{
    if (!root_)
        throw std::logic_error("evaluating an empty expression");
    return root_->eval(value);
}

}  // namespace mfh
