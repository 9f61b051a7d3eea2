#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace mfh
{
//---------------------------------------------------------------------------//
/*!
 * Closed-form real expression in one free variable.
 *
 * Grammar: numbers, the free variable, named constants, + - * / ^, unary
 * minus, parentheses and the functions exp log sqrt abs sin cos tan tanh
 * sinh cosh, plus min(a,b), max(a,b) and pow(a,b). `^` is right associative
 * and binds tighter than unary minus, so `-x^2` means `-(x^2)`.
 */
class Expression
{
  public:
    struct Node;

    Expression() = default;
    Expression(std::string_view text,
               std::string variable,
               std::map<std::string, double> constants = {});

    double operator()(double value) const;

    std::string const& text() const { return text_; }
    bool empty() const { return !root_; }

  private:
    std::string text_;
    std::shared_ptr<Node const> root_;
};

}  // namespace mfh
