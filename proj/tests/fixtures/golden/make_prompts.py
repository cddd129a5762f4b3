# Builds the prompt goldens from the instruction templates and the listings
# in this directory. Run from this directory.
import json
import textwrap

Q = "spouse of composer of It Goes Like It Goes"
STATEMENT = f"{Q} is _"
QUESTION = f"What is {Q} ?"
CONTEXT = "The composer of It Goes Like It Goes is David Shire. The spouse of David Shire is Didi Conn."


def canon(text):
    text = text.replace("{{}}", "{}")
    lines = [l.rstrip() for l in textwrap.dedent(text).split("\n")]
    return "\n".join(lines).rstrip("\n")


def body(name):
    with open(name) as f:
        return canon(f.read())


nl = body("natural_language.txt").replace(" is _", " is Didi Conn.")
bodies = {
    "nl": ("Explanation", nl, "explanation"),
    "json": ("JSON structure", body("json.txt"), "JSON structure"),
    "py_static": ("Python code snippet", body("python_static.txt"), "python code"),
    "py_dynamic": ("Python code snippet", body("python_dynamic.txt"), "python code"),
}


def envelope(key, text):
    return json.dumps({"Answer": "Didi Conn", key: text}, ensure_ascii=False)


def statement_block(obj):
    return f"Given the incomplete statement: {STATEMENT} , provide answer and generate {obj} for completing the statement"


def question_block(obj):
    return f"Given the question: {QUESTION} generate {obj} and provide answer to the question"


out = {
    "prompt_zero_statement.txt": statement_block("explanation"),
    "prompt_zero_question.txt": question_block("explanation"),
    "prompt_context_statement.txt": f"Given context: {CONTEXT} and the uncompleted statement: {STATEMENT} , "
    "provide answer and generate explanation for completing the statement",
    "prompt_context_question.txt": f"Given context: {CONTEXT} and the question: {QUESTION} "
    "generate explanation and provide answer to the question",
}
for tag, (key, text, obj) in bodies.items():
    env = envelope(key, text)
    out[f"prompt_one_statement_{tag}.txt"] = (
        f"Given the incomplete statement: {STATEMENT} ,\n{env}\n{statement_block(obj)}")
    out[f"prompt_one_question_{tag}.txt"] = f"Given the question: {QUESTION}\n{env}\n{question_block(obj)}"

for name, text in out.items():
    with open(name, "w") as f:
        f.write(text)
