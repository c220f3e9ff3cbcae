#pragma once

#include "cftc/error.hpp"

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cftc {

enum class EventKind { exists, value };

/// A failure event: a port together with what is observed on it. EXISTS only
/// tracks whether a message occurs on the port, VALUE also tracks its value.
struct EventRef
{
    std::string port;
    EventKind kind = EventKind::value;

    friend auto operator<=>( const EventRef&, const EventRef& ) = default;
    friend bool operator==( const EventRef&, const EventRef& ) = default;
};

inline std::string to_string( EventKind kind )
{
    return kind == EventKind::exists ? "exists" : "value";
}

inline std::string to_string( const EventRef& event )
{
    return event.port + "." + to_string( event.kind );
}

inline std::ostream& operator<<( std::ostream& os, const EventRef& event )
{
    return os << to_string( event );
}

/// Monotone propositional formula over events. Negation never occurs inside
/// a formula; it only shows up in the clauses of the negated DNF.
class Formula
{
public:
    enum class Op { literal, conj, disj };

    static Formula literal( EventRef event )
    {
        auto node = std::make_shared<Node>();
        node->op = Op::literal;
        node->event = std::move( event );
        return Formula{ std::move( node ) };
    }

    /// Builds a conjunction. A single operand is returned unchanged.
    static Formula conj( std::vector<Formula> operands ) { return compound( Op::conj, std::move( operands ) ); }

    /// Builds a disjunction. A single operand is returned unchanged.
    static Formula disj( std::vector<Formula> operands ) { return compound( Op::disj, std::move( operands ) ); }

    [[nodiscard]] Op op() const { return node_->op; }
    [[nodiscard]] bool is_literal() const { return node_->op == Op::literal; }
    [[nodiscard]] const EventRef& event() const { return node_->event; }
    [[nodiscard]] const std::vector<Formula>& operands() const { return node_->operands; }

    [[nodiscard]] std::set<EventRef> events() const
    {
        std::set<EventRef> out;
        collect_events( out );
        return out;
    }

    [[nodiscard]] std::size_t literal_count() const
    {
        if ( is_literal() )
            return 1;
        std::size_t n = 0;
        for ( const auto& child : operands() )
            n += child.literal_count();
        return n;
    }

    friend bool operator==( const Formula& a, const Formula& b )
    {
        if ( a.node_ == b.node_ )
            return true;
        if ( a.op() != b.op() )
            return false;
        if ( a.is_literal() )
            return a.event() == b.event();
        return a.operands() == b.operands();
    }

private:
    struct Node
    {
        Op op = Op::literal;
        EventRef event;
        std::vector<Formula> operands;
    };

    explicit Formula( std::shared_ptr<const Node> node ) : node_{ std::move( node ) } {}

    static Formula compound( Op op, std::vector<Formula> operands )
    {
        if ( operands.empty() )
            throw Error( "formula without literals" );
        if ( operands.size() == 1 )
            return std::move( operands.front() );
        auto node = std::make_shared<Node>();
        node->op = op;
        node->operands = std::move( operands );
        return Formula{ std::move( node ) };
    }

    void collect_events( std::set<EventRef>& out ) const
    {
        if ( is_literal() ) {
            out.insert( event() );
            return;
        }
        for ( const auto& child : operands() )
            child.collect_events( out );
    }

    std::shared_ptr<const Node> node_;
};

inline std::string to_string( const Formula& formula )
{
    if ( formula.is_literal() )
        return to_string( formula.event() );
    const char* sep = formula.op() == Formula::Op::conj ? " & " : " | ";
    std::string out;
    bool first = true;
    for ( const auto& child : formula.operands() ) {
        if ( !first )
            out += sep;
        first = false;
        if ( child.is_literal() )
            out += to_string( child );
        else
            out += "(" + to_string( child ) + ")";
    }
    return out;
}

inline std::ostream& operator<<( std::ostream& os, const Formula& formula )
{
    return os << to_string( formula );
}

/// Conjunction of negated events. Events are kept sorted and unique.
class NegClause
{
public:
    NegClause() = default;

    explicit NegClause( std::vector<EventRef> events ) : events_{ std::move( events ) }
    {
        std::sort( events_.begin(), events_.end() );
        events_.erase( std::unique( events_.begin(), events_.end() ), events_.end() );
    }

    explicit NegClause( const std::set<EventRef>& events ) : events_( events.begin(), events.end() ) {}

    [[nodiscard]] const std::vector<EventRef>& events() const { return events_; }
    [[nodiscard]] std::size_t size() const { return events_.size(); }
    [[nodiscard]] bool empty() const { return events_.empty(); }

    [[nodiscard]] bool contains( const EventRef& event ) const
    {
        return std::binary_search( events_.begin(), events_.end(), event );
    }

    /// True iff every event of this clause also occurs in `other`.
    [[nodiscard]] bool subset_of( const NegClause& other ) const
    {
        return std::includes( other.events_.begin(), other.events_.end(), events_.begin(), events_.end() );
    }

    [[nodiscard]] NegClause merged( const NegClause& other ) const
    {
        std::vector<EventRef> out;
        std::set_union( events_.begin(), events_.end(), other.events_.begin(), other.events_.end(),
                        std::back_inserter( out ) );
        NegClause result;
        result.events_ = std::move( out );
        return result;
    }

    friend auto operator<=>( const NegClause&, const NegClause& ) = default;
    friend bool operator==( const NegClause&, const NegClause& ) = default;

private:
    std::vector<EventRef> events_;
};

/// Canonical text form, e.g. `!p.value&!r.exists`.
inline std::string to_string( const NegClause& clause )
{
    std::string out;
    for ( const auto& event : clause.events() ) {
        if ( !out.empty() )
            out += "&";
        out += "!" + to_string( event );
    }
    return out;
}

inline std::ostream& operator<<( std::ostream& os, const NegClause& clause )
{
    return os << to_string( clause );
}

/// Sorts the clause list, drops duplicates and drops every clause that is a
/// strict superset of another one.
inline std::vector<NegClause> canonicalize( std::vector<NegClause> clauses )
{
    std::sort( clauses.begin(), clauses.end(), []( const NegClause& a, const NegClause& b ) {
        if ( a.size() != b.size() )
            return a.size() < b.size();
        return a < b;
    } );
    clauses.erase( std::unique( clauses.begin(), clauses.end() ), clauses.end() );

    std::vector<NegClause> kept;
    for ( auto& clause : clauses ) {
        bool subsumed = std::any_of( kept.begin(), kept.end(),
                                     [&]( const NegClause& k ) { return k.subset_of( clause ); } );
        if ( !subsumed )
            kept.push_back( std::move( clause ) );
    }
    std::sort( kept.begin(), kept.end() );
    return kept;
}

/// Clauses of the DNF of the negated formula, in canonical form.
inline std::vector<NegClause> neg_dnf( const Formula& formula )
{
    switch ( formula.op() ) {
    case Formula::Op::literal:
        return { NegClause{ std::vector<EventRef>{ formula.event() } } };
    case Formula::Op::conj: {
        // !(a & b) = !a | !b
        std::vector<NegClause> out;
        for ( const auto& child : formula.operands() ) {
            auto part = neg_dnf( child );
            out.insert( out.end(), part.begin(), part.end() );
        }
        return canonicalize( std::move( out ) );
    }
    case Formula::Op::disj: {
        // !(a | b) = !a & !b, distributed over the clause lists
        std::vector<NegClause> acc{ NegClause{} };
        for ( const auto& child : formula.operands() ) {
            auto part = neg_dnf( child );
            std::vector<NegClause> next;
            next.reserve( acc.size() * part.size() );
            for ( const auto& a : acc )
                for ( const auto& b : part )
                    next.push_back( a.merged( b ) );
            acc = canonicalize( std::move( next ) );
        }
        return acc;
    }
    }
    return {};
}

using Assignment = std::map<EventRef, bool>;

inline bool eval( const Formula& formula, const Assignment& assignment )
{
    switch ( formula.op() ) {
    case Formula::Op::literal: {
        auto it = assignment.find( formula.event() );
        if ( it == assignment.end() )
            throw Error( "unassigned event: " + to_string( formula.event() ) );
        return it->second;
    }
    case Formula::Op::conj:
        return std::all_of( formula.operands().begin(), formula.operands().end(),
                            [&]( const Formula& f ) { return eval( f, assignment ); } );
    case Formula::Op::disj:
        return std::any_of( formula.operands().begin(), formula.operands().end(),
                            [&]( const Formula& f ) { return eval( f, assignment ); } );
    }
    return false;
}

/// Calls `visit` with every total assignment over `events`.
template <typename Visitor>
void for_each_assignment( const std::set<EventRef>& events, Visitor&& visit )
{
    const std::vector<EventRef> order( events.begin(), events.end() );
    if ( order.size() >= 31 )
        throw Error( "too many events for truth-table enumeration" );
    const std::uint32_t total = 1u << order.size();
    Assignment assignment;
    for ( std::uint32_t bits = 0; bits < total; ++bits ) {
        for ( std::size_t i = 0; i < order.size(); ++i )
            assignment[order[i]] = ( ( bits >> i ) & 1u ) != 0;
        visit( std::as_const( assignment ) );
    }
}

/// Truth-table equivalence over the union of both event sets.
inline bool formulas_equiv( const Formula& a, const Formula& b )
{
    auto events = a.events();
    auto other = b.events();
    events.insert( other.begin(), other.end() );
    bool equal = true;
    for_each_assignment( events, [&]( const Assignment& assignment ) {
        if ( equal && eval( a, assignment ) != eval( b, assignment ) )
            equal = false;
    } );
    return equal;
}

/// Evaluates the disjunction of the clauses, each read as a conjunction of
/// negated events. Missing events are treated as false.
inline bool eval_clauses( const std::vector<NegClause>& clauses, const Assignment& assignment )
{
    return std::any_of( clauses.begin(), clauses.end(), [&]( const NegClause& clause ) {
        return std::all_of( clause.events().begin(), clause.events().end(), [&]( const EventRef& e ) {
            auto it = assignment.find( e );
            return it == assignment.end() || !it->second;
        } );
    } );
}

namespace detail {

template <typename Replace>
Formula substitute_with( const Formula& formula, const EventRef& target, Replace&& replace )
{
    if ( formula.is_literal() )
        return formula.event() == target ? replace() : formula;
    std::vector<Formula> children;
    children.reserve( formula.operands().size() );
    for ( const auto& child : formula.operands() )
        children.push_back( substitute_with( child, target, replace ) );
    return formula.op() == Formula::Op::conj ? Formula::conj( std::move( children ) )
                                             : Formula::disj( std::move( children ) );
}

} // namespace detail

/// Replaces every occurrence of `target` by `replacement`.
inline Formula substitute( const Formula& formula, const EventRef& target, const Formula& replacement )
{
    return detail::substitute_with( formula, target, [&] { return replacement; } );
}

/// Replaces every occurrence of `target` by `target & replacement`.
inline Formula substitute_strict( const Formula& formula, const EventRef& target, const Formula& replacement )
{
    return detail::substitute_with( formula, target, [&] {
        return Formula::conj( { Formula::literal( target ), replacement } );
    } );
}

// ---------------------------------------------------------------------------
// Text syntax: `port.exists`, `port.value`, `&`, `|`, parentheses. `&` binds
// tighter than `|`.

inline bool is_ident_start( char c )
{
    return std::isalpha( static_cast<unsigned char>( c ) ) || c == '_';
}

inline bool is_ident_char( char c )
{
    return std::isalnum( static_cast<unsigned char>( c ) ) || c == '_';
}

namespace detail {

class FormulaParser
{
public:
    FormulaParser( std::string_view text, std::size_t line, std::size_t column )
        : text_{ text }, line_{ line }, column_{ column }
    {
    }

    Formula parse()
    {
        skip_ws();
        if ( pos_ >= text_.size() )
            fail( "empty formula" );
        auto result = parse_disj();
        skip_ws();
        if ( pos_ < text_.size() )
            fail( std::string( "unexpected '" ) + text_[pos_] + "'" );
        return result;
    }

private:
    Formula parse_disj()
    {
        std::vector<Formula> parts{ parse_conj() };
        while ( accept( '|' ) )
            parts.push_back( parse_conj() );
        return Formula::disj( std::move( parts ) );
    }

    Formula parse_conj()
    {
        std::vector<Formula> parts{ parse_atom() };
        while ( accept( '&' ) )
            parts.push_back( parse_atom() );
        return Formula::conj( std::move( parts ) );
    }

    Formula parse_atom()
    {
        skip_ws();
        if ( accept( '(' ) ) {
            auto inner = parse_disj();
            if ( !accept( ')' ) )
                fail( "expected ')'" );
            return inner;
        }
        if ( pos_ >= text_.size() )
            fail( "unexpected end of formula" );
        if ( !is_ident_start( text_[pos_] ) )
            fail( std::string( "unexpected '" ) + text_[pos_] + "'" );
        const std::size_t start = pos_;
        auto port = ident();
        if ( pos_ >= text_.size() || text_[pos_] != '.' ) {
            if ( port == "true" || port == "false" )
                fail( "constant formulas are not supported", start );
            fail( "expected '.exists' or '.value' after '" + port + "'" );
        }
        ++pos_;
        const std::size_t kind_start = pos_;
        auto kind = ident();
        if ( kind == "exists" )
            return Formula::literal( { std::move( port ), EventKind::exists } );
        if ( kind == "value" )
            return Formula::literal( { std::move( port ), EventKind::value } );
        fail( "unknown event kind '" + kind + "'", kind_start );
    }

    std::string ident()
    {
        const std::size_t start = pos_;
        while ( pos_ < text_.size() && is_ident_char( text_[pos_] ) )
            ++pos_;
        return std::string( text_.substr( start, pos_ - start ) );
    }

    bool accept( char c )
    {
        skip_ws();
        if ( pos_ < text_.size() && text_[pos_] == c ) {
            ++pos_;
            return true;
        }
        return false;
    }

    void skip_ws()
    {
        while ( pos_ < text_.size() && std::isspace( static_cast<unsigned char>( text_[pos_] ) ) )
            ++pos_;
    }

    [[noreturn]] void fail( const std::string& what ) const { fail( what, pos_ ); }

    [[noreturn]] void fail( const std::string& what, std::size_t at ) const
    {
        throw ParseError( what, line_, column_ + at );
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_;
    std::size_t column_;
};

} // namespace detail

/// Parses the formula text syntax. `line`/`column` locate the first
/// character for error messages when the text is embedded in a larger file.
inline Formula parse_formula( std::string_view text, std::size_t line = 1, std::size_t column = 1 )
{
    return detail::FormulaParser{ text, line, column }.parse();
}

} // namespace cftc
