#pragma once

#include <string>
#include <vector>

namespace dfept::testing {

/// Hand-derived graph for one snippet. Nodes are "name@token:type",
/// edges "name@token->name@token". Token indices were counted by hand.
struct DfgOracleCase {
  std::string name;
  std::string code;
  std::vector<std::string> nodes;
  std::vector<std::string> edges;
  bool back_edges = false;
  /// Subset of `edges` that only exist because of loop back-binding.
  std::vector<std::string> loop_edges;
};

inline const std::vector<DfgOracleCase>& dfg_oracle_cases() {
  static const std::vector<DfgOracleCase> cases = {
      {"decl_binary",
       "int a = b + c;",
       {"a@1:int", "b@3:unknown", "c@5:unknown"},
       {"b@3->a@1", "c@5->a@1"}},
      {"decl_no_init", "int x;", {"x@1:int"}, {}},
      {"decl_copy", "int a = b;", {"a@1:int", "b@3:unknown"}, {"b@3->a@1"}},
      {"null_flow",
       "void f(char *src) { char *str1 = NULL; char *str2 = src; strcpy(str1, src); strcpy(str2, src); }",
       {"src@5:char *", "str1@10:char *", "NULL@12:null", "str2@16:char *", "src@18:char *", "str1@22:char *",
        "src@24:char *", "str2@29:char *", "src@31:char *"},
       {"NULL@12->str1@10", "src@5->src@18", "src@18->str2@16", "str1@10->str1@22", "src@5->src@24",
        "str2@16->str2@29", "src@5->src@31"}},
      {"params_return",
       "int f(int a, int b) { return a + b; }",
       {"a@4:int", "b@7:int", "a@11:int", "b@13:int"},
       {"a@4->a@11", "b@7->b@13"}},
      {"reassign_kills",
       "void f(int p) { int x = p; x = 3; g(x); }",
       {"p@4:int", "x@8:int", "p@10:int", "x@12:int", "3@14:number_literal", "x@18:int"},
       {"p@4->p@10", "p@10->x@8", "3@14->x@12", "x@12->x@18"}},
      {"compound_assign",
       "void f(int a) { int s = 0; s += a; g(s); }",
       {"a@4:int", "s@8:int", "0@10:number_literal", "s@12:int", "a@14:int", "s@18:int"},
       {"0@10->s@8", "a@4->a@14", "a@14->s@12", "s@8->s@12", "s@12->s@18"}},
      {"increment",
       "void f(void) { int i = 0; i++; g(i); }",
       {"i@7:int", "0@9:number_literal", "i@11:int", "i@16:int"},
       {"0@9->i@7", "i@7->i@11", "i@11->i@16"}},
      {"if_else_union",
       "void f(int c) { int x; if (c) { x = 1; } else { x = 2; } g(x); }",
       {"c@4:int", "x@8:int", "c@12:int", "x@15:int", "1@17:number_literal", "x@22:int", "2@24:number_literal",
        "x@29:int"},
       {"c@4->c@12", "1@17->x@15", "2@24->x@22", "x@15->x@29", "x@22->x@29"}},
      {"if_without_else",
       "void f(int c) { int x = 0; if (c) x = c; g(x); }",
       {"c@4:int", "x@8:int", "0@10:number_literal", "c@14:int", "x@16:int", "c@18:int", "x@22:int"},
       {"0@10->x@8", "c@4->c@14", "c@4->c@18", "c@18->x@16", "x@8->x@22", "x@16->x@22"}},
      {"call_assign",
       "void f(int a, int b) { int y; y = max(a, b); }",
       {"a@4:int", "b@7:int", "y@11:int", "y@13:int", "a@17:int", "b@19:int"},
       {"a@4->a@17", "b@7->b@19", "a@17->y@13", "b@19->y@13"}},
      {"subscript_store",
       "void f(int *a, int i, int v) { a[i] = v; g(a); }",
       {"a@5:int *", "i@8:int", "v@11:int", "a@14:int *", "i@16:int", "v@19:int", "a@23:int *"},
       {"v@11->v@19", "v@19->a@14", "a@5->a@14", "i@8->i@16", "a@14->a@23"}},
      {"field_store",
       "void f(struct s *p, int v) { p->len = v; }",
       {"p@6:struct s *", "v@9:int", "p@12:struct s *", "v@16:int"},
       {"v@9->v@16", "v@16->p@12", "p@6->p@12"}},
      {"deref_store",
       "void f(char *p) { *p = 0; }",
       {"p@5:char *", "p@9:char *", "0@11:number_literal"},
       {"0@11->p@9", "p@5->p@9"}},
      {"while_forward",
       "int f(int n) { int s = 0; while (n > 0) { s = s + n; n = n - 1; } return s; }",
       {"n@4:int", "s@8:int", "0@10:number_literal", "n@14:int", "s@19:int", "s@21:int", "n@23:int", "n@25:int",
        "n@27:int", "1@29:number_literal", "s@33:int"},
       {"0@10->s@8", "n@4->n@14", "s@8->s@21", "n@4->n@23", "s@21->s@19", "n@23->s@19", "n@4->n@27", "n@27->n@25",
        "1@29->n@25", "s@8->s@33", "s@19->s@33"}},
      {"while_back_edges",
       "int f(int n) { int s = 0; while (n > 0) { s = s + n; n = n - 1; } return s; }",
       {"n@4:int", "s@8:int", "0@10:number_literal", "n@14:int", "s@19:int", "s@21:int", "n@23:int", "n@25:int",
        "n@27:int", "1@29:number_literal", "s@33:int"},
       {"0@10->s@8", "n@4->n@14", "s@8->s@21", "n@4->n@23", "s@21->s@19", "n@23->s@19", "n@4->n@27", "n@27->n@25",
        "1@29->n@25", "s@8->s@33", "s@19->s@33", "n@25->n@14", "n@25->n@23"},
       true,
       {"n@25->n@14", "n@25->n@23"}},
      {"for_loop",
       "void f(int *a, int n) { for (int i = 0; i < n; i++) { a[i] = i; } }",
       {"a@5:int *", "n@8:int", "i@14:int", "0@16:number_literal", "i@18:int", "n@20:int", "i@22:int", "a@26:int *",
        "i@28:int", "i@31:int"},
       {"0@16->i@14", "i@14->i@18", "n@8->n@20", "i@14->i@22", "i@14->i@28", "i@22->i@28", "i@14->i@31",
        "i@22->i@31", "i@31->a@26", "a@5->a@26"}},
      {"alpha_a",
       "int f(int a) { int b = a * 2; return b; }",
       {"a@4:int", "b@8:int", "a@10:int", "2@12:number_literal", "b@15:int"},
       {"a@4->a@10", "a@10->b@8", "2@12->b@8", "b@8->b@15"}},
      {"alpha_b",
       "int g(int q) { int r = q * 2; return r; }",
       {"q@4:int", "r@8:int", "q@10:int", "2@12:number_literal", "r@15:int"},
       {"q@4->q@10", "q@10->r@8", "2@12->r@8", "r@8->r@15"}},
      {"string_literal",
       "void f(void) { char *s = \"hi\"; puts(s); }",
       {"s@8:char *", "\"hi\"@10:string_literal", "s@14:char *"},
       {"\"hi\"@10->s@8", "s@8->s@14"}},
      {"multi_declarator",
       "void f(int a) { int x = a, y = x; }",
       {"a@4:int", "x@8:int", "a@10:int", "y@12:int", "x@14:int"},
       {"a@4->a@10", "a@10->x@8", "x@8->x@14", "x@14->y@12"}},
      {"chained_assign",
       "void f(int c) { int a; int b; a = b = c; }",
       {"c@4:int", "a@8:int", "b@11:int", "a@13:int", "b@15:int", "c@17:int"},
       {"c@4->c@17", "c@17->b@15", "c@17->a@13", "b@15->a@13"}},
      {"pointer_array_types",
       "void f(char **argv) { int buf[8]; buf[0] = argv[1][0]; }",
       {"argv@6:char **", "buf@10:int []", "buf@15:int []", "argv@20:char **", "1@22:number_literal",
        "0@25:number_literal"},
       {"argv@6->argv@20", "argv@20->buf@15", "1@22->buf@15", "0@25->buf@15", "buf@10->buf@15"}},
      {"do_while",
       "int f(int n) { do { n = n - 1; } while (n); return n; }",
       {"n@4:int", "n@9:int", "n@11:int", "1@13:number_literal", "n@18:int", "n@22:int"},
       {"n@4->n@11", "n@11->n@9", "1@13->n@9", "n@9->n@18", "n@9->n@22"}},
      {"switch_cases",
       "int f(int k) { int r = 0; switch (k) { case 1: r = k; break; default: r = 2; } return r; }",
       {"k@4:int", "r@8:int", "0@10:number_literal", "k@14:int", "r@20:int", "k@22:int", "r@28:int",
        "2@30:number_literal", "r@34:int"},
       {"0@10->r@8", "k@4->k@14", "k@4->k@22", "k@22->r@20", "2@30->r@28", "r@8->r@34", "r@20->r@34",
        "r@28->r@34"}},
      {"cast_unknown_global",
       "void f(void) { long v = (long)g_count; }",
       {"v@7:long", "g_count@12:unknown"},
       {"g_count@12->v@7"}},
  };
  return cases;
}

}  // namespace dfept::testing
