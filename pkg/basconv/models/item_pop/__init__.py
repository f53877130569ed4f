from .item_pop import ItemPop
