from mlgc.commands import evaluate, generate, refine, train

COMMANDS = (generate, train, refine, evaluate)
