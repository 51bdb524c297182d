
import pytest

from fuzzyprolog.syntax import (
    CrispClause,
    FplSyntaxError,
    FuzzyClause,
    FuzzyFact,
    Program,
    ProgramError,
    parse_program,
    parse_query,
    parse_term,
    tokenize,
    truth_from_term,
    validate,
)
from fuzzyprolog.terms import Atom, Num, Struct, Var, render
from fuzzyprolog.truthlattice import FALSE, UNIT, canonicalize, from_point
from conftest import PROGRAMS


def errors_of(src):
    with pytest.raises(ProgramError) as info:
        parse_program(src)
    return [d.message for d in info.value.diagnostics]


class TestLexer:
    def test_kinds(self):
        toks = tokenize("tall(john):~ 0.7.")
        assert [t.kind for t in toks] == ["name", "punct", "name", "punct", "name", "num", "end", "eof"]
        assert toks[0].functional and not toks[2].functional

    def test_numbers(self):
        vals = [t.value for t in tokenize("1 2.5 3e2 0.25e-1") if t.kind == "num"]
        assert vals == [1, 2.5, 300.0, 0.025]
        assert isinstance(vals[0], int)

    def test_comments_skipped(self):
        toks = tokenize("% line\np. /* block\n comment */ q.")
        assert [t.text for t in toks if t.kind == "name"] == ["p", "q"]
        assert toks[-2].line == 3

    def test_truth_bound_before_end(self):
        texts = [t.text for t in tokenize("V .>. 0.7.")]
        assert texts == ["V", ".>.", "0.7", ".", ""]

    def test_quoted_atom(self):
        (tok, *_rest) = tokenize("'hello world'")
        assert tok.value == "hello world"

    def test_error_position(self):
        with pytest.raises(FplSyntaxError) as info:
            tokenize("p.\n  q ` r.")
        assert (info.value.line, info.value.col) == (2, 5)

    def test_unterminated_quote(self):
        with pytest.raises(FplSyntaxError, match="unterminated"):
            tokenize("p('abc).")


class TestTerms:
    def test_operators(self):
        t, _ = parse_term("X is N + 1 * 2")
        assert t == Struct("is", (Var("X"), Struct("+", (Var("N"), Struct("*", (Num(1), Num(2)))))))

    def test_lists_and_pairs(self):
        t, _ = parse_term("[(mo,9),(D,H)|T]")
        assert render(t) == "[(mo,9),(D,H)|T]"

    def test_negative_number(self):
        t, _ = parse_term("f(-1, - 1, 2-1)")
        assert t.args[0] == Num(-1)
        assert t.args[1] == Struct("-", (Num(1),))
        assert t.args[2] == Struct("-", (Num(2), Num(1)))

    def test_varmap(self):
        _, vm = parse_term("p(X, Y, X, _)")
        assert list(vm) == ["X", "Y"]

    @pytest.mark.parametrize("text", [
        "p(X,Y)", "a:-b,c", "X=f(Y)", "[1,2,3]", "- (1)", "1-(2-3)", "(a,b)", "'A b'",
        "f(- 1)", "X .>. 0.7", "[0.2,0.5]v[0.8,1]", "{a}", "p(1.0)",
    ])
    def test_render_round_trip(self, text):
        t, _ = parse_term(text)
        again, _ = parse_term(render(t))
        assert again == t


class TestQueries:
    def test_fuzzy_query(self):
        q = parse_query("age_about_15(peter,X).")
        assert q == Struct("age_about_15", (Atom("peter"), Var("X")))

    def test_crisp_query(self):
        assert parse_query("?- student(nick).") == Struct("student", (Atom("nick"),))

    def test_truth_bound_query(self):
        q = parse_query("compatible(T1,T2,V), V .>. 0.7.")
        assert q.functor == "," and q.args[1] == Struct(".>.", (Var("V"), Num(0.7)))

    def test_error_has_position(self):
        with pytest.raises(FplSyntaxError) as info:
            parse_query("p(X")
        assert info.value.line == 1

    def test_trailing_garbage(self):
        with pytest.raises(FplSyntaxError):
            parse_query("p. q.")


class TestClassification:
    def test_fuzzy_fact(self):
        p = parse_program("tall(john):~ 0.7.")
        assert p.clauses[("tall", 1)] == [FuzzyFact(Struct("tall", (Atom("john"),)), from_point(0.7))]

    def test_fuzzy_clause(self):
        p = parse_program("good_player(X):~min tall(X),swift(X).")
        X = Var("X")
        assert p.clauses[("good_player", 1)] == [FuzzyClause(
            Struct("good_player", (X,)), "min",
            (Struct("tall", (X,)), Struct("swift", (X,))))]

    def test_empty_source(self):
        p = parse_program("")
        assert p == Program() and p.warnings == []

    def test_union_literal(self):
        p = parse_program("youth(45):~ [0.2,0.5]v[0.8,1].")
        assert p.clauses[("youth", 1)][0].truth == canonicalize([(0.2, 0.5), (0.8, 1)])

    def test_truth_literal_grammar(self):
        assert truth_from_term(parse_query("[0.2,0.5]v[0.8,1]")) == canonicalize([(0.2, 0.5), (0.8, 1)])
        assert truth_from_term(parse_query("0.3v[0.3,0.4]")) == canonicalize([(0.3, 0.4)])
        with pytest.raises(ValueError):
            truth_from_term(parse_query("foo"))

    def test_propositional_and_default_aggregator(self):
        p = parse_program("p :~ q, r.\nq :~ 0.5.")
        (c,) = p.clauses[("p", 0)]
        assert c.aggregator == "min" and c.body == (Atom("q"), Atom("r"))

    def test_explicit_truth_arguments_stripped(self, teenager):
        (c,) = teenager.clauses[("teenager_student", 1)]
        assert isinstance(c, FuzzyClause)
        assert render(c.head) == "teenager_student(X)"
        assert [render(g) for g in c.body] == ["f_student(X)", "age_about_15(X)"]

    def test_truth_in_head_with_empty_body(self, teenager):
        facts = teenager.clauses[("age_about_15", 1)]
        assert [(render(f.head), str(f.truth)) for f in facts] == [
            ("age_about_15(john)", "1"), ("age_about_15(susan)", "0.7"), ("age_about_15(nick)", "0")]

    def test_truth_headed_crisp_clause_is_guarded_fact(self, teenager):
        (f,) = teenager.clauses[("f_student", 1)]
        assert f.truth == from_point(1) and render(f.guard[0]) == "student(X)"

    def test_crisp(self, teenager):
        assert teenager.is_crisp(("student", 1))
        assert teenager.clauses[("student", 1)][0] == CrispClause(Struct("student", (Atom("john"),)))

    def test_defaults_bind_to_source_arity(self, teenager):
        assert teenager.defaults[("f_student", 1)] == FALSE
        assert teenager.defaults[("age_about_15", 1)] == UNIT
        assert teenager.defaults[("teenager_student", 1)] == UNIT

    def test_default_for_predicate_without_clauses(self):
        p = parse_program(":-default(r/1,[0.3,0.4]).")
        assert str(p.default_for(("r", 1))) == "[0.3,0.4]"
        assert str(p.default_for(("r", 0))) == "[0.3,0.4]"

    def test_clause_order_preserved(self):
        p = parse_program("p(a):~0.1.\np(b):~0.2.\np(c):~0.3.")
        assert [render(c.head) for c in p.clauses[("p", 1)]] == ["p(a)", "p(b)", "p(c)"]

    def test_piecewise(self, timetable):
        assert timetable.piecewise["few_days"].points[2] == (2.0, 0.6)
        assert timetable.is_fuzzy(("few_days", 1))


class TestValidation:
    def test_mixed_crisp_fuzzy(self):
        assert "p/1 both crisp and fuzzy" in errors_of("p(a):~0.5.\np(a).")

    def test_not_increasing(self):
        (msg,) = errors_of("f :# fuzzy_predicate([(0,1),(0,0.5)]).")
        assert "x not strictly increasing" in msg

    def test_piecewise_membership_range(self):
        (msg,) = errors_of("f :# fuzzy_predicate([(0,1),(1,1.5)]).")
        assert "outside [0,1]" in msg

    def test_piecewise_needs_two_points(self):
        assert any("at least 2" in m for m in errors_of("f :# fuzzy_predicate([(0,1)])."))

    def test_unknown_aggregator(self):
        assert any("unknown aggregator" in m for m in errors_of("p(X) :~ median q(X), r(X)."))

    def test_duplicate_default(self):
        assert any("duplicate default" in m for m in errors_of(":-default(p/1,0).\n:-default(p/1,1)."))

    def test_default_on_crisp(self):
        assert any("crisp" in m for m in errors_of("p(a).\n:-default(p/1,0)."))

    @pytest.mark.parametrize("body,what", [
        ("q, !", "cut"), ("(q ; r)", "disjunction"), ("\\+ q", "negation"), ("(q -> r)", "if-then-else"),
    ])
    def test_unsupported_constructs(self, body, what):
        assert any(what in m for m in errors_of(f"p :- {body}.\nq.\nr."))

    def test_truth_bounds_only_in_queries(self):
        assert any("only allowed in queries" in m for m in errors_of("p(V) :- V .>. 0.5."))

    def test_all_errors_reported_with_positions(self):
        with pytest.raises(ProgramError) as info:
            parse_program("ok.\np :~ median q.\nf :# fuzzy_predicate([(1,1),(0,0)]).")
        ds = info.value.diagnostics
        assert len(ds) == 2 and [d.line for d in ds] == [2, 3]

    def test_syntax_error_position(self):
        with pytest.raises(ProgramError) as info:
            parse_program("p(a).\nq(b :~ 0.5.")
        (d,) = info.value.diagnostics
        assert d.line == 2 and d.severity == "error"

    def test_teenager_listing_is_clean(self, teenager):
        assert [d for d in validate(teenager) if d.severity == "error"] == []

    def test_missing_default_warns(self, players):
        msgs = [d.message for d in players.warnings]
        assert "tall/2 has no default declaration; using [0,1]" in msgs
        assert all(d.severity == "warning" for d in validate(players))

    def test_validate_catches_hand_built_program(self):
        bad = Program(clauses={
            ("p", 1): [FuzzyFact(Struct("p", (Atom("a"),)), from_point(0.5)),
                       CrispClause(Struct("p", (Atom("b"),)))],
        })
        assert any(d.severity == "error" for d in validate(bad))


CORPUS = sorted(PROGRAMS.glob("*.fpl"))
INLINE = [
    "p :~ 0.5.\nq :~ prod p, p.\n:-default(q/1,[0.3,0.4]).",
    "youth(45):~ [0.2,0.5]v[0.8,1].\n'odd name'(X) :~ luka youth(X), youth(X).",
    "len([],0).\nlen([_|T],N) :- len(T,M), N is M+1.",
    "r(X) :~ max s(X,Y), t(Y).\ns(a,b) :~ 0.25.\nt(b) :~ 1.",
]


@pytest.mark.parametrize("source", [p.read_text() for p in CORPUS] + INLINE,
                         ids=[p.name for p in CORPUS] + [f"inline{i}" for i in range(len(INLINE))])
def test_round_trip(source):
    first = parse_program(source)
    again = parse_program(first.render())
    assert again == first
    assert again.render() == first.render()
