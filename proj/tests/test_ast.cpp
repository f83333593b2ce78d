#include <gtest/gtest.h>

#include <algorithm>
#include <regex>
#include <set>

#include "dfept/ast.hpp"

using namespace dfept;

namespace {

SyntaxTree parse(const std::string& code, bool strict = false) { return parse_function({"t", code, std::nullopt}, strict); }

std::vector<std::string> leaf_texts(const SyntaxTree& t) {
  std::vector<std::string> out;
  for (const auto& l : leaf_tokens(t)) out.emplace_back(t.text(l.node));
  return out;
}

std::vector<NodeId> find_kind(const SyntaxTree& t, std::string_view kind) {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < t.size(); ++i)
    if (t.node(i).kind == kind) out.push_back(i);
  return out;
}

const char* kNullCopy =
    "void vuln(char *src) {\n"
    "  char *str1 = NULL;\n"
    "  char *str2 = malloc(16);\n"
    "  strcpy(str1, src);\n"
    "  strcpy(str2, src);\n"
    "}\n";

}  // namespace

TEST(ParseFunction, MainHasOneParameterlessDeclarator) {
  SyntaxTree t = parse("int main(){return 0;}");
  EXPECT_FALSE(t.has_error());
  auto defs = find_kind(t, "function_definition");
  ASSERT_EQ(defs.size(), 1u);
  auto fns = find_kind(t, "function_declarator");
  ASSERT_EQ(fns.size(), 1u);
  NodeId params = t.child_by_field(fns[0], "parameters");
  ASSERT_NE(params, kNoNode);
  for (NodeId c : t.node(params).children) EXPECT_NE(t.node(c).kind, "parameter_declaration");
}

TEST(ParseFunction, EmptyAndBlankInputAreRejected) {
  for (const char* src : {"", "   \n\t "}) {
    try {
      parse(src);
      FAIL() << "expected EmptySource";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::EmptySource);
    }
  }
}

TEST(ParseFunction, InvalidUtf8IsFormatError) {
  try {
    parse("int f() { return \xff; }");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FormatError);
  }
}

TEST(ParseFunction, StrictModeRejectsErrorNodes) {
  const std::string src = "int f( { ]] broken";
  SyntaxTree lenient = parse(src);
  EXPECT_TRUE(lenient.has_error());
  EXPECT_GT(lenient.error_count(), 0u);
  try {
    parse(src, true);
    FAIL();
  } catch (const ParseRejected& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseRejected);
    EXPECT_EQ(e.span(), *lenient.first_error());
    EXPECT_LE(e.span().end, src.size());
  }
}

TEST(ParseFunction, StrictAcceptsCleanCode) { EXPECT_NO_THROW(parse("int f(int a){return a;}", true)); }

TEST(ParseFunction, DeterministicReparse) {
  EXPECT_EQ(to_sexpr(parse(kNullCopy)), to_sexpr(parse(kNullCopy)));
}

TEST(ParseFunction, ChildSpansNestInsideParents) {
  SyntaxTree t = parse(kNullCopy);
  for (NodeId i = 0; i < t.size(); ++i) {
    const SyntaxNode& n = t.node(i);
    EXPECT_LE(n.span.start, n.span.end);
    for (NodeId c : n.children) {
      EXPECT_TRUE(n.span.contains(t.node(c).span)) << n.kind << " / " << t.node(c).kind;
      EXPECT_EQ(t.node(c).parent, i);
    }
    if (n.is_leaf()) EXPECT_FALSE(n.kind.empty());
  }
}

TEST(LeafTokens, HandTokenizedFunction) {
  SyntaxTree t = parse("int f(int a){return a;}");
  EXPECT_EQ(leaf_texts(t),
            (std::vector<std::string>{"int", "f", "(", "int", "a", ")", "{", "return", "a", ";", "}"}));
}

TEST(LeafTokens, DeclarationHasThreeIndexedLeaves) {
  auto leaves = leaf_tokens(parse("int a;"));
  ASSERT_EQ(leaves.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(leaves[i].token_index, i);
}

TEST(LeafTokens, SingleToken) {
  auto leaves = leaf_tokens(parse("x"));
  ASSERT_EQ(leaves.size(), 1u);
  EXPECT_EQ(leaves[0].token_index, 0u);
}

TEST(LeafTokens, NullCopyHasRepeatedStr1) {
  SyntaxTree t = parse(kNullCopy);
  int str1 = 0;
  for (const auto& l : leaf_tokens(t))
    if (t.node(l.node).kind == "identifier" && t.text(l.node) == "str1") ++str1;
  EXPECT_EQ(str1, 2);
}

TEST(LeafTokens, IndicesIncreaseWithSpans) {
  auto t = parse(kNullCopy);
  auto leaves = leaf_tokens(t);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    EXPECT_EQ(leaves[i].token_index, i);
    if (i) EXPECT_LT(t.node(leaves[i - 1].node).span.start, t.node(leaves[i].node).span.start);
  }
}

TEST(LeafTokens, CommentsAndDirectivesExcluded) {
  SyntaxTree t = parse("#define N 4\nint f(int a) { /* note */ return a; // tail\n}");
  for (const auto& l : leaf_tokens(t)) {
    const std::string_view s = t.text(l.node);
    EXPECT_EQ(s.find("/*"), std::string_view::npos);
    EXPECT_EQ(s.find("//"), std::string_view::npos);
    EXPECT_NE(s, "#define");
    EXPECT_NE(s, "N");
  }
  EXPECT_EQ(leaf_texts(t).front(), "int");
}

TEST(LeafTokens, StringLiteralIsOneLeaf) {
  SyntaxTree t = parse("void f(void) { puts(\"a b c\"); }");
  auto texts = leaf_texts(t);
  EXPECT_NE(std::find(texts.begin(), texts.end(), "\"a b c\""), texts.end());
}

TEST(LeafTokens, EveryIdentifierOccurrenceHasOneLeaf) {
  const std::string src = kNullCopy;
  SyntaxTree t = parse(src);
  std::multiset<std::size_t> leaf_starts;
  for (const auto& l : leaf_tokens(t))
    if (t.node(l.node).kind == "identifier") leaf_starts.insert(t.node(l.node).span.start);
  // identifiers in this snippet that are not type names or keywords
  std::regex ident(R"(\b(src|str1|str2|malloc|strcpy|NULL|vuln)\b)");
  std::size_t count = 0;
  for (auto it = std::sregex_iterator(src.begin(), src.end(), ident); it != std::sregex_iterator(); ++it) {
    ++count;
    const std::size_t pos = static_cast<std::size_t>(it->position());
    if (it->str() == "NULL") continue;  // grammar treats NULL as a literal
    EXPECT_EQ(leaf_starts.count(pos), 1u) << it->str() << " at " << pos;
  }
  EXPECT_EQ(count, 12u);
}

TEST(LeafTokens, GapsBetweenLeavesAreWhitespace) {
  const std::string src = "int f(int a, int b)\n{\n  int c = a * b;\n  return c;\n}\n";
  SyntaxTree t = parse(src);
  std::string rebuilt;
  std::size_t pos = 0;
  for (const auto& l : leaf_tokens(t)) {
    const Span s = t.node(l.node).span;
    const std::string gap = src.substr(pos, s.start - pos);
    EXPECT_EQ(gap.find_first_not_of(" \t\r\n"), std::string::npos);
    rebuilt += gap;
    rebuilt += t.text(l.node);
    pos = s.end;
  }
  rebuilt += src.substr(pos);
  EXPECT_EQ(rebuilt, src);
}

TEST(LeafTokens, ErrorTreesStillTokenize) {
  SyntaxTree t = parse("int f( { ]] broken");
  EXPECT_FALSE(leaf_tokens(t).empty());
}

TEST(Sexpr, RendersRootKind) {
  const std::string s = to_sexpr(parse("int a;"));
  EXPECT_EQ(s.rfind("(translation_unit", 0), 0u);
  EXPECT_NE(s.find("declaration"), std::string::npos);
}

TEST(Utf8, Validation) {
  EXPECT_TRUE(is_valid_utf8("plain"));
  EXPECT_TRUE(is_valid_utf8("caf\xc3\xa9"));
  EXPECT_FALSE(is_valid_utf8("\xc3"));
  EXPECT_FALSE(is_valid_utf8("\xed\xa0\x80"));  // surrogate
}
